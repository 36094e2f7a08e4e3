# Sequential measurement simulator
