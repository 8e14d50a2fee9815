"""vortexforge command-line interface."""
