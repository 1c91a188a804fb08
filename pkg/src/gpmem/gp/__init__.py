"""Gaussian-process core: Cholesky factors, conditioning and likelihoods."""
