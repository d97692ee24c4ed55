y = x * 0.5;
