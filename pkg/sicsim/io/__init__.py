# Dataset reading and writing
