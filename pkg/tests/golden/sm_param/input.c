void compute(double *pos, int **nbr, int n) {
    for (int i = 0; i < n; i++) {
        pos[i] = pos[i] + 1.0;
    }
}
