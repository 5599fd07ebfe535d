int apply_all(int *v, int n, int (*fn)(int))
{
    int changed = 0;
    for (int i = 0; i < n; i++) {
        int r = fn(v[i]);
        if (r != v[i])
            changed++;
        v[i] = r;
    }
    return changed;
}
