int k = 3;
double w = Calc_t(1.5e-3) * k + 7;
