#define HALF 0.5
#include <math.h>
y = Calc_t(0.25) * x;
