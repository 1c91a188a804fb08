"""Base covariance-function interface. Every base kernel kind implements it."""

from __future__ import annotations

import abc
from dataclasses import dataclass
from gpmem._compat import StrEnum

import numpy as np


class BaseKernelKind(StrEnum):
    """The six base kernel kinds, in canonical sort order."""

    CONST = "CONST"
    LIN = "LIN"
    PER = "PER"
    SE = "SE"
    WN = "WN"
    RQ = "RQ"

    @property
    def rank(self) -> int:
        """Position in the canonical factor ordering."""
        return _RANK[self]

    @property
    def symbol(self) -> str:
        """Short name used in symbolic structures (``C`` for the constant kernel)."""
        return "C" if self is BaseKernelKind.CONST else self.value


_RANK = {kind: i for i, kind in enumerate(BaseKernelKind)}


@dataclass(frozen=True)
class KernelMeta:
    """Metadata describing a base kernel formula."""

    kind: BaseKernelKind
    roles: tuple[str, ...]  # parameter roles, amplitude first
    description: str = ""
    stationary: bool = True


class BaseFormula(abc.ABC):
    """Closed-form covariance of one base kernel kind.

    Subclasses implement ``value`` and ``gradients`` on broadcastable inputs:
    ``X`` is a column ``(n, 1)`` and ``Y`` a row ``(1, m)``. ``theta`` holds the
    parameter values in ``meta.roles`` order; the first role is always the
    amplitude σ, which enters every formula as σ².
    """

    meta: KernelMeta

    @abc.abstractmethod
    def value(self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]) -> np.ndarray:
        """Return the ``(n, m)`` matrix k(x_i, y_j | θ)."""

    @abc.abstractmethod
    def gradients(
        self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]
    ) -> list[np.ndarray]:
        """Return ∂k/∂θ_r for each role r, same shape as ``value``."""

    def variance(self, theta: tuple[float, ...]) -> float:
        """k(x, x) for stationary kinds."""
        if not self.meta.stationary:
            raise TypeError(f"{self.meta.kind} has no constant self-covariance")
        return float(theta[0] ** 2)
