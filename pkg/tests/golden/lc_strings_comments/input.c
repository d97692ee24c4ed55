// scale by 0.5 here
const char *msg = "factor 0.5";
y = 0.5; /* was 2.5 */
