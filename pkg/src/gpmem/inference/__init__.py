"""Scope-tagged MCMC, nested schedules and gradient ascent over hyperparameters."""
