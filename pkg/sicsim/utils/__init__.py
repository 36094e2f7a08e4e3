# Errors and ray labels
