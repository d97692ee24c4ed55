void torsion(int n) {
    for (int i = 0; i < n; i++) {
        for (int j = 0; j < nb[i]; j++) {
            for (int k = 0; k < na[j]; k++) {
                for (int l = 0; l < nt[k]; l++) {
                    accumulate(i, j, k, l);
                }
            }
        }
    }
}
