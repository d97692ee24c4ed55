void build(int n, int m) {
    for (int i = 0; i < n; i++) {
    }
}

int rows[64][16];
