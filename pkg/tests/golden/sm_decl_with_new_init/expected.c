void setup(int n) {
    double f[2048];
    f[0] = 0.0;
}
