int **neighbor;
