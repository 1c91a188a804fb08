"""Machine-readable result files."""

from gpmem.storage.results import ResultStore

__all__ = ["ResultStore"]
