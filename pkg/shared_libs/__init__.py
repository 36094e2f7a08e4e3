# Shared libraries for the qutrit contextuality toolkit
