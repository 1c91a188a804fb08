"""Kernel registry: look up base-kernel formulas by kind."""

from __future__ import annotations

from gpmem.core.errors import ConfigError
from gpmem.kernels.base import BaseFormula, BaseKernelKind

# Populated by ``gpmem.kernels.builtin`` at import time via ``register_formula``.
FORMULA_REGISTRY: dict[BaseKernelKind, BaseFormula] = {}


def register_formula(cls: type[BaseFormula]) -> type[BaseFormula]:
    """Class decorator that registers a formula singleton under its kind."""
    FORMULA_REGISTRY[cls.meta.kind] = cls()
    return cls


def get_formula(kind: BaseKernelKind | str) -> BaseFormula:
    """Look up a registered formula. Raises ConfigError if the kind is unknown."""
    from gpmem.kernels import builtin  # noqa: F401

    try:
        return FORMULA_REGISTRY[BaseKernelKind(kind)]
    except (KeyError, ValueError):
        available = ", ".join(k.value for k in FORMULA_REGISTRY) or "(none)"
        raise ConfigError(f"Unknown kernel '{kind}'. Available: {available}") from None
