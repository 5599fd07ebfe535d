static int clamp(int v, int lo, int hi)
{
    if (v < lo)
        return lo;
    if (v > hi)
        return hi;
    return v;
}

int scale(int v, int factor)
{
    int r = v * factor;
    return clamp(r, 0, 255);
}
