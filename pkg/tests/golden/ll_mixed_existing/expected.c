LOOP_BUILD_A: for (int i = 0; i < n; i++) {
    INNER: for (int j = 0; j < m; j++) {
        visit(i, j);
    }
    LOOP_BUILD_B: for (int k = 0; k < p; k++) {
        touch(i, k);
    }
}
