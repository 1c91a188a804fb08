"""Gaussian-process memoization: emulators, kernel structure discovery and Thompson sampling."""

__version__ = "0.1.0"
