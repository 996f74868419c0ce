"""Cross-layer key establishment simulator for clustered sensor networks."""
