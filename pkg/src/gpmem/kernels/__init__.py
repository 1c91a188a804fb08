"""Covariance functions: evaluation, composition and symbolic normalisation."""
