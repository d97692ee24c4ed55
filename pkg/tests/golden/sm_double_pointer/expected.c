int neighbor[2048][512];
