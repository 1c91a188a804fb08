"""Kernel-structure grammar, structure discovery and posterior structure queries."""
