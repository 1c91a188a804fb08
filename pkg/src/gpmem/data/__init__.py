"""Dataset loading, saving and synthetic generators."""
