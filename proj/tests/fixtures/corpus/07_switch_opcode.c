int dispatch(int op, int a, int b)
{
    int r;
    switch (op) {
    case 0:
        r = a + b;
        break;
    case 1:
        r = a - b;
        break;
    case 2:
        if (b == 0)
            return 0;
        r = a / b;
        break;
    default:
        r = -1;
    }
    return r;
}
