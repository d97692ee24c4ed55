int k = 3;
double w = 0.5 * k + 2;
