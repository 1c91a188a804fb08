"""Source functions that gpmem can wrap, looked up by name."""
