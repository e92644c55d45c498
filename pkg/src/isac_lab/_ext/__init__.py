"""Optional compiled kernels; import failure falls back to numpy."""
