int hex_decode(const char *in, unsigned char *out, size_t outlen)
{
    size_t i;
    for (i = 0; in[2 * i] && in[2 * i + 1]; i++) {
        int hi = hexval(in[2 * i]);
        int lo = hexval(in[2 * i + 1]);
        if (hi < 0 || lo < 0)
            return -1;
        out[i] = (unsigned char)((hi << 4) | lo);
    }
    return (int)i;
}
