void compute(double pos[2048], int nbr[2048][512], int n) {
    for (int i = 0; i < n; i++) {
        pos[i] = pos[i] + 1.0;
    }
}
