# Count tables, witnesses, diagnostics, graph reconstruction, memory bound, detection model
