"""Thompson-sampling Bayesian optimisation over a gpmem emulator."""
