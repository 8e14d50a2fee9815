"""vortexforge packages."""
