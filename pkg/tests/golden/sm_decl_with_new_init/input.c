void setup(int n) {
    double *f = new double[n];
    f[0] = 0.0;
}
