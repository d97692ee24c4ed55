int count;
double total;

void step(int n) {
    for (int i = 0; i < n; i++) {
        total = total + 1.0;
    }
}
