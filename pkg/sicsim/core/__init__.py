# Qutrit algebra and the Yu-Oh ray set
