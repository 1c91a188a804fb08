"""Core utilities shared by every subpackage."""
