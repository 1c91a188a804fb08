"""Closed-form base kernels: SE, LIN, PER, WN, CONST, RQ."""

from __future__ import annotations

import numpy as np

from gpmem.kernels.base import BaseFormula, BaseKernelKind, KernelMeta
from gpmem.kernels.registry import register_formula


def _shape(X: np.ndarray, Y: np.ndarray) -> tuple[int, ...]:
    return np.broadcast_shapes(X.shape, Y.shape)


@register_formula
class SquaredExponential(BaseFormula):
    """σ² exp(−(x−x′)² / (2ℓ²))."""

    meta = KernelMeta(
        kind=BaseKernelKind.SE, roles=("sf", "l"), description="smooth function"
    )

    def value(self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]) -> np.ndarray:
        """Evaluate the covariance matrix."""
        sf, ell = theta
        return sf**2 * np.exp(-((X - Y) ** 2) / (2.0 * ell**2))

    def gradients(
        self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]
    ) -> list[np.ndarray]:
        """Partials with respect to σ and ℓ."""
        sf, ell = theta
        d2 = (X - Y) ** 2
        k = sf**2 * np.exp(-d2 / (2.0 * ell**2))
        return [2.0 * k / sf, k * d2 / ell**3]


@register_formula
class Linear(BaseFormula):
    """σ² x x′."""

    meta = KernelMeta(
        kind=BaseKernelKind.LIN, roles=("sf",), description="linear trend", stationary=False
    )

    def value(self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]) -> np.ndarray:
        """Evaluate the covariance matrix."""
        (sf,) = theta
        return sf**2 * (X * Y)

    def gradients(
        self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]
    ) -> list[np.ndarray]:
        """Partial with respect to σ."""
        (sf,) = theta
        return [2.0 * sf * (X * Y)]


@register_formula
class Periodic(BaseFormula):
    """σ² exp(−2 sin²(π(x−x′)/p) / ℓ²).

    The exponent is negative; with a positive sign the function is unbounded
    and not a covariance.
    """

    meta = KernelMeta(
        kind=BaseKernelKind.PER, roles=("sf", "p", "l"), description="periodic pattern"
    )

    def value(self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]) -> np.ndarray:
        """Evaluate the covariance matrix."""
        sf, period, ell = theta
        s = np.sin(np.pi * (X - Y) / period) ** 2
        return sf**2 * np.exp(-2.0 * s / ell**2)

    def gradients(
        self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]
    ) -> list[np.ndarray]:
        """Partials with respect to σ, p and ℓ."""
        sf, period, ell = theta
        d = X - Y
        r = np.pi * d / period
        s = np.sin(r) ** 2
        k = sf**2 * np.exp(-2.0 * s / ell**2)
        dk_dp = k * 2.0 * np.sin(2.0 * r) * np.pi * d / (ell**2 * period**2)
        return [2.0 * k / sf, dk_dp, k * 4.0 * s / ell**3]


@register_formula
class WhiteNoise(BaseFormula):
    """σ² δ(x, x′), with δ evaluated as exact equality of the inputs."""

    meta = KernelMeta(kind=BaseKernelKind.WN, roles=("sf",), description="white noise")

    def value(self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]) -> np.ndarray:
        """Evaluate the covariance matrix."""
        (sf,) = theta
        return sf**2 * (X == Y).astype(float)

    def gradients(
        self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]
    ) -> list[np.ndarray]:
        """Partial with respect to σ."""
        (sf,) = theta
        return [2.0 * sf * (X == Y).astype(float)]


@register_formula
class Constant(BaseFormula):
    """σ² everywhere."""

    meta = KernelMeta(kind=BaseKernelKind.CONST, roles=("sf",), description="constant offset")

    def value(self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]) -> np.ndarray:
        """Evaluate the covariance matrix."""
        (sf,) = theta
        return np.full(_shape(X, Y), sf**2)

    def gradients(
        self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]
    ) -> list[np.ndarray]:
        """Partial with respect to σ."""
        (sf,) = theta
        return [np.full(_shape(X, Y), 2.0 * sf)]


@register_formula
class RationalQuadratic(BaseFormula):
    """σ² (1 + (x−x′)² / (2αℓ²))^(−α)."""

    meta = KernelMeta(
        kind=BaseKernelKind.RQ, roles=("sf", "a", "l"), description="multi-scale smooth function"
    )

    def value(self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]) -> np.ndarray:
        """Evaluate the covariance matrix."""
        sf, alpha, ell = theta
        return sf**2 * (1.0 + (X - Y) ** 2 / (2.0 * alpha * ell**2)) ** (-alpha)

    def gradients(
        self, X: np.ndarray, Y: np.ndarray, theta: tuple[float, ...]
    ) -> list[np.ndarray]:
        """Partials with respect to σ, α and ℓ."""
        sf, alpha, ell = theta
        d2 = (X - Y) ** 2
        base = 1.0 + d2 / (2.0 * alpha * ell**2)
        k = sf**2 * base ** (-alpha)
        dk_da = k * (-np.log(base) + d2 / (2.0 * alpha * ell**2 * base))
        return [2.0 * k / sf, dk_da, k * d2 / (ell**3 * base)]
