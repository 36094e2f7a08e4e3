# Config and dataset validators
