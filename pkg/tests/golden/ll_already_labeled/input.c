MY_SHELL_LOOP: for (int s = 0; s < ns; s++) {
    sum = sum + w[s];
}
