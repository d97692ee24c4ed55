y = x * Calc_t(0.5);
