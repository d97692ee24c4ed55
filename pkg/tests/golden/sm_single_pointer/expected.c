double f[2048];
