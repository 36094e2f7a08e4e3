# Yu-Oh qutrit contextuality simulator and statistics
