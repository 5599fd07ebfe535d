int count_valid(const int *v, int n)
{
    int c = 0;
    for (int i = 0; i < n; ++i) {
        if (v[i] < 0)
            continue;
        if (v[i] > 1000)
            break;
        c++;
    }
    return c;
}
