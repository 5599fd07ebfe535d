void bitmap_set(unsigned char *map, size_t nbits, size_t bit)
{
    if (bit >= nbits)
        return;
    map[bit / 8] |= (unsigned char)(1u << (bit % 8));
}
