#define NBOND 524288
#define NMAX 2048
double atoms[NMAX];
double bonds[NBOND];
