"""Cholesky factorisation with adaptive jitter, and rank-1 extension."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from gpmem.core.config import settings
from gpmem.core.errors import NotPositiveDefiniteError
from gpmem.core.logging import get_logger

log = get_logger(__name__)


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular L with L Lᵀ = K + jitter·I."""

    L: np.ndarray
    jitter: float = 0.0

    @property
    def n(self) -> int:
        """Matrix dimension."""
        return int(self.L.shape[0])

    def solve(self, b: np.ndarray) -> np.ndarray:
        """(L Lᵀ)⁻¹ b via two triangular solves."""
        return sla.cho_solve((self.L, True), b, check_finite=False)

    def solve_lower(self, b: np.ndarray) -> np.ndarray:
        """L⁻¹ b."""
        return sla.solve_triangular(self.L, b, lower=True, check_finite=False)

    def log_det(self) -> float:
        """log |L Lᵀ|."""
        return 2.0 * float(np.sum(np.log(np.diag(self.L))))

    def append(self, k_new: np.ndarray, k_self: float) -> CholeskyFactor | None:
        """Extend by one row/column via the Schur complement, O(n²).

        ``k_new`` holds covariances between the existing inputs and the new
        one, ``k_self`` the new input's self-covariance (without jitter).
        Returns ``None`` when the new pivot is not positive; the caller then
        refactorises from scratch.
        """
        row = self.solve_lower(np.asarray(k_new, dtype=float).reshape(-1))
        pivot = k_self + self.jitter - float(row @ row)
        if not pivot > 0.0:
            return None
        n = self.n
        L = np.zeros((n + 1, n + 1))
        L[:n, :n] = self.L
        L[n, :n] = row
        L[n, n] = np.sqrt(pivot)
        return CholeskyFactor(L, self.jitter)


def cholesky(K: np.ndarray) -> CholeskyFactor:
    """Plain lower Cholesky of a symmetric matrix, no jitter.

    Raises:
        NotPositiveDefiniteError: on a non-positive pivot.
    """
    try:
        L = sla.cholesky(np.asarray(K, dtype=float), lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from None
    return CholeskyFactor(L, 0.0)


def jitter_levels(K: np.ndarray) -> list[float]:
    """Absolute jitters to try: base·scale, growing geometrically up to max·scale."""
    diag = np.diag(K)
    scale = float(np.mean(diag)) if diag.size else 1.0
    if not scale > 0.0 or not np.isfinite(scale):
        scale = 1.0
    levels = []
    rel = settings.jitter_base
    while rel <= settings.jitter_max * (1.0 + 1e-9):
        levels.append(rel * scale)
        rel *= settings.jitter_growth
    return levels


def jittered_cholesky(K: np.ndarray) -> CholeskyFactor:
    """Factor K + jitter·I, escalating jitter until the factorisation succeeds.

    The matrix is symmetrised exactly first.

    Raises:
        NotPositiveDefiniteError: carrying every jitter level attempted.
    """
    K = np.asarray(K, dtype=float)
    K = 0.5 * (K + K.T)
    levels = jitter_levels(K)
    eye = np.eye(K.shape[0])
    for i, jitter in enumerate(levels):
        try:
            L = sla.cholesky(K + jitter * eye, lower=True, check_finite=False)
        except sla.LinAlgError:
            continue
        if not np.all(np.isfinite(L)):
            continue
        if i > 0:
            log.debug("cholesky.jitter_escalated", jitter=jitter, attempts=i + 1, n=K.shape[0])
        return CholeskyFactor(L, jitter)
    raise NotPositiveDefiniteError("cholesky failed after jitter escalation", levels)
