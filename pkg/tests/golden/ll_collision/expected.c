LOOP_K_A: for (int i = 0; i < n; i++) {
    work(i);
}
LOOP_K_B: for (int j = 0; j < m; j++) {
    other(j);
}
