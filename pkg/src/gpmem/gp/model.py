"""Exact zero-mean GP conditioning, joint sampling and marginal likelihood."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from gpmem.core.errors import DataError, NumericError
from gpmem.gp.linalg import CholeskyFactor, jittered_cholesky
from gpmem.kernels.evaluate import gram_gradients, gram_matrix
from gpmem.kernels.expr import KernelExpr, params_of
from gpmem.kernels.params import HyperParams

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GPModel:
    """Zero-mean GP prior: a kernel expression bound to a hyperparameter table."""

    kernel: KernelExpr
    params: HyperParams

    def __post_init__(self) -> None:
        """Fail early on kernel parameters missing from the table."""
        for name in params_of(self.kernel):
            self.params[name]

    def gram(self, xs: ArrayLike, xs2: ArrayLike | None = None) -> np.ndarray:
        """K(xs, xs2 | θ)."""
        return gram_matrix(self.kernel, self.params, xs, xs2)

    def factor(self, xs: ArrayLike) -> CholeskyFactor:
        """Jittered Cholesky factor of the training gram matrix."""
        return jittered_cholesky(self.gram(xs))


@dataclass(frozen=True)
class PosteriorGaussian:
    """Joint Gaussian N(mean, cov) over the query inputs."""

    mean: np.ndarray
    cov: np.ndarray
    inputs: np.ndarray

    def __post_init__(self) -> None:
        """Check that the three arrays agree in size."""
        n = self.inputs.shape[0]
        if self.mean.shape != (n,) or self.cov.shape != (n, n):
            raise DataError(
                f"posterior shapes disagree: mean {self.mean.shape}, cov {self.cov.shape}, "
                f"inputs {self.inputs.shape}"
            )

    @property
    def sd(self) -> np.ndarray:
        """Marginal standard deviations (negative round-off clipped to zero)."""
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))


def _vectors(xs: ArrayLike, ys: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float).reshape(-1)
    y = np.asarray(ys, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise DataError(f"inputs and outputs differ in length: {x.size} vs {y.size}")
    return x, y


def log_likelihood_from_gram(
    K: np.ndarray, ys: ArrayLike, factor: CholeskyFactor | None = None
) -> float:
    """log N(y | 0, K): −½yᵀα − Σ log L_ii − (n/2) log 2π, triangular solves only."""
    y = np.asarray(ys, dtype=float).reshape(-1)
    if y.size == 0:
        raise DataError("log-likelihood needs at least one observation")
    chol = factor if factor is not None else jittered_cholesky(K)
    alpha = chol.solve(y)
    value = -0.5 * float(y @ alpha) - 0.5 * chol.log_det() - 0.5 * y.size * _LOG_2PI
    if not np.isfinite(value):
        raise NumericError("log-likelihood is not finite")
    return value


def log_likelihood(model: GPModel, xs: ArrayLike, ys: ArrayLike) -> float:
    """Exact Gaussian log marginal likelihood of ``ys`` at ``xs``."""
    x, y = _vectors(xs, ys)
    if x.size == 0:
        raise DataError("log-likelihood needs at least one observation")
    return log_likelihood_from_gram(model.gram(x), y)


def log_likelihood_gradient(
    model: GPModel, xs: ArrayLike, ys: ArrayLike, names: Iterable[str] | None = None
) -> dict[str, float]:
    """∂/∂θ_j log P(y | x, θ) = ½ αᵀ (∂K/∂θ_j) α − ½ tr(K⁻¹ ∂K/∂θ_j).

    Parameters not referenced by the kernel have zero gradient.

    Raises:
        NumericError: naming the first parameter with a non-finite gradient.
    """
    x, y = _vectors(xs, ys)
    K, dK = gram_gradients(model.kernel, model.params, x)
    chol = jittered_cholesky(K)
    alpha = chol.solve(y)
    K_inv = chol.solve(np.eye(x.size))
    wanted = list(names) if names is not None else list(dK)
    out: dict[str, float] = {}
    for name in wanted:
        G = dK.get(name)
        if G is None:
            out[name] = 0.0
            continue
        value = 0.5 * float(alpha @ G @ alpha) - 0.5 * float(np.sum(K_inv * G.T))
        if not np.isfinite(value):
            raise NumericError(f"non-finite log-likelihood gradient for parameter '{name}'")
        out[name] = value
    return out


def posterior(
    model: GPModel,
    xs: ArrayLike,
    ys: ArrayLike,
    xq: ArrayLike,
    factor: CholeskyFactor | None = None,
) -> PosteriorGaussian:
    """Condition the GP on (xs, ys) and return the joint Gaussian at ``xq``.

    With no training data this is the prior N(0, K(xq, xq)). ``factor`` may
    carry a precomputed Cholesky factor of the training gram matrix.
    """
    x, y = _vectors(xs, ys)
    q = np.asarray(xq, dtype=float).reshape(-1)
    if q.size == 0:
        raise DataError("posterior needs at least one query input")
    K_qq = model.gram(q)
    if x.size == 0:
        return PosteriorGaussian(np.zeros(q.size), K_qq, q)
    chol = factor if factor is not None else model.factor(x)
    K_xq = model.gram(x, q)
    mean = K_xq.T @ chol.solve(y)
    V = chol.solve_lower(K_xq)
    cov = K_qq - V.T @ V
    cov = 0.5 * (cov + cov.T)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise NumericError("posterior moments are not finite")
    return PosteriorGaussian(mean, cov, q)


def sample_joint(post: PosteriorGaussian, rng: np.random.Generator) -> np.ndarray:
    """One joint draw μ̂ + chol(K̂ + jitter·I)·z, z standard normal."""
    chol = jittered_cholesky(post.cov)
    z = rng.standard_normal(post.mean.size)
    return post.mean + chol.L @ z


def predictive_bands(post: PosteriorGaussian) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper mean ± 2 sd bands."""
    return post.mean - 2.0 * post.sd, post.mean + 2.0 * post.sd
