void torsion(int n) {
    LOOP_TORSION_ANGLES_A: for (int i = 0; i < n; i++) {
        LOOP_TORSION_ANGLES_B: for (int j = 0; j < nb[i]; j++) {
            LOOP_TORSION_ANGLES_C: for (int k = 0; k < na[j]; k++) {
                LOOP_TORSION_ANGLES_D: for (int l = 0; l < nt[k]; l++) {
                    accumulate(i, j, k, l);
                }
            }
        }
    }
}
