void copy_bytes(char *dst, const char *src, size_t len) {
    size_t max = MAX_BUF;
    if (len > max) {
        return;
    }
    memcpy(dst, src, len);
}
