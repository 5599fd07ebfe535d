int *alloc_table(unsigned int count, unsigned int size)
{
    unsigned int total = count * size;
    int *t = malloc(total);
    if (t == NULL)
        return NULL;
    memset(t, 0, total);
    return t;
}
