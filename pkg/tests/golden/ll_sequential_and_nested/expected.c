void rhok(int n) {
    LOOP_RHOK_A: for (int b = 0; b < n; b++) {
        LOOP_RHOK_B: for (int k = 0; k < 512; k++) {
            process(b, k);
        }
    }
    LOOP_RHOK_C: while (remaining > 0) {
        drain();
    }
}
