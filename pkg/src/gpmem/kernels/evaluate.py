"""Recursive evaluation of kernel expressions into covariance matrices."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np
from numpy.typing import ArrayLike

from gpmem.core.errors import DataError, NumericError
from gpmem.kernels.expr import Base, KernelExpr, Product, Sum
from gpmem.kernels.registry import get_formula


def _theta(leaf: Base, params: Mapping[str, float]) -> tuple[float, ...]:
    return tuple(float(params[name]) for name in leaf.params)


def _gram(
    expr: KernelExpr, params: Mapping[str, float], X: np.ndarray, Y: np.ndarray
) -> np.ndarray:
    if isinstance(expr, Base):
        return get_formula(expr.kind).value(X, Y, _theta(expr, params))
    left = _gram(expr.left, params, X, Y)
    right = _gram(expr.right, params, X, Y)
    return left + right if isinstance(expr, Sum) else left * right


def _as_inputs(xs: ArrayLike) -> np.ndarray:
    arr = np.asarray(xs, dtype=float).reshape(-1)
    if arr.size == 0:
        raise DataError("kernel inputs must be non-empty")
    return arr


def gram_matrix(
    expr: KernelExpr,
    params: Mapping[str, float],
    xs: ArrayLike,
    xs2: ArrayLike | None = None,
) -> np.ndarray:
    """Matrix with entries k(xs[i], xs2[j] | θ).

    With ``xs2`` omitted (or equal to ``xs``) the result is symmetrised exactly.
    """
    X = _as_inputs(xs)
    Y = X if xs2 is None else _as_inputs(xs2)
    K = np.asarray(_gram(expr, params, X[:, None], Y[None, :]), dtype=float)
    K = np.broadcast_to(K, (X.size, Y.size)).copy()
    if not np.all(np.isfinite(K)):
        raise NumericError(f"kernel {expr} produced non-finite covariances")
    if Y is X or (X.shape == Y.shape and np.array_equal(X, Y)):
        K = 0.5 * (K + K.T)
    return K


def eval_kernel(
    expr: KernelExpr, params: Mapping[str, float], x: float, x2: float
) -> float:
    """Scalar k(x, x2 | θ)."""
    return float(gram_matrix(expr, params, [x], [x2])[0, 0])


def _grads(
    expr: KernelExpr, params: Mapping[str, float], X: np.ndarray, Y: np.ndarray
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    if isinstance(expr, Base):
        formula = get_formula(expr.kind)
        theta = _theta(expr, params)
        value = formula.value(X, Y, theta)
        grads: dict[str, np.ndarray] = {}
        for name, g in zip(expr.params, formula.gradients(X, Y, theta), strict=True):
            grads[name] = grads.get(name, 0.0) + g
        return value, grads
    lv, lg = _grads(expr.left, params, X, Y)
    rv, rg = _grads(expr.right, params, X, Y)
    if isinstance(expr, Sum):
        merged = dict(lg)
        for name, g in rg.items():
            merged[name] = merged.get(name, 0.0) + g
        return lv + rv, merged
    assert isinstance(expr, Product)
    merged = {name: g * rv for name, g in lg.items()}
    for name, g in rg.items():
        merged[name] = merged.get(name, 0.0) + lv * g
    return lv * rv, merged


def gram_gradients(
    expr: KernelExpr,
    params: Mapping[str, float],
    xs: ArrayLike,
    xs2: ArrayLike | None = None,
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Covariance matrix and ∂K/∂θ_j for every parameter name in ``expr``."""
    X = _as_inputs(xs)
    Y = X if xs2 is None else _as_inputs(xs2)
    shape = (X.size, Y.size)
    value, grads = _grads(expr, params, X[:, None], Y[None, :])
    K = np.broadcast_to(value, shape).copy()
    out: dict[str, np.ndarray] = {}
    for name, g in grads.items():
        G = np.broadcast_to(np.asarray(g, dtype=float), shape).copy()
        if not np.all(np.isfinite(G)):
            raise NumericError(f"non-finite covariance gradient for parameter '{name}'")
        out[name] = G
    return K, out
