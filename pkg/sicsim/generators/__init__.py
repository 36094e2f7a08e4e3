# JSON/CSV artifact writers
