int grid[128];
