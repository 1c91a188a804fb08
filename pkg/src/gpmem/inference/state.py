"""Inference state and targets.

A target is anything with ``log_density(state)``; targets used by gradient
ascent also provide ``gradient(state, names)``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field, replace
from typing import Any, Protocol

import numpy as np
from numpy.typing import ArrayLike

from gpmem.core.errors import ConfigError, DataError
from gpmem.gp.model import GPModel, log_likelihood, log_likelihood_gradient
from gpmem.kernels.expr import KernelExpr
from gpmem.kernels.params import HyperParams


class StructureChoice(Protocol):
    """Random kernel-structure choices carried alongside θ."""

    def kernel(self) -> KernelExpr: ...

    def log_prior(self) -> float: ...


@dataclass(frozen=True)
class ModelState:
    """Everything a chain updates: θ and, optionally, the kernel structure."""

    params: HyperParams
    grammar: Any = None

    def with_params(self, params: HyperParams) -> ModelState:
        """Copy with a new θ table."""
        return replace(self, params=params)

    def with_grammar(self, grammar: Any) -> ModelState:
        """Copy with new structure choices."""
        return replace(self, grammar=grammar)


class InferenceTarget(Protocol):
    """Unnormalised log posterior over model states."""

    def log_density(self, state: ModelState) -> float: ...


def prior_gradient(params: HyperParams, names: Iterable[str]) -> dict[str, float]:
    """∂/∂θ_j Σ log p(θ_i | parents), including children whose prior names θ_j."""
    out: dict[str, float] = {}
    for name in names:
        total = 0.0
        prior = params.priors[name]
        if prior is not None:
            total += prior.grad_value(params[name], params.values)
        for child in params.children_of(name):
            child_prior = params.priors[child]
            assert child_prior is not None
            total += child_prior.grad_parents(params[child], params.values).get(name, 0.0)
        out[name] = total
    return out


@dataclass
class GPTarget:
    """log p(θ) + log p(structure) + log P(y | x, θ, kernel).

    The kernel comes from the state's structure choices when present,
    otherwise from ``kernel``.
    """

    xs: np.ndarray
    ys: np.ndarray
    kernel: KernelExpr | None = None

    def __post_init__(self) -> None:
        """Coerce the data to float vectors."""
        self.xs = np.asarray(self.xs, dtype=float).reshape(-1)
        self.ys = np.asarray(self.ys, dtype=float).reshape(-1)
        if self.xs.size == 0 or self.xs.shape != self.ys.shape:
            raise DataError("target needs a non-empty dataset with matching xs and ys")

    @classmethod
    def from_data(cls, xs: ArrayLike, ys: ArrayLike, kernel: KernelExpr | None = None) -> GPTarget:
        """Build from array-likes."""
        return cls(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), kernel)

    def kernel_of(self, state: ModelState) -> KernelExpr:
        """The kernel the state currently implies."""
        if state.grammar is not None:
            return state.grammar.kernel()
        if self.kernel is None:
            raise ConfigError("target has no kernel and the state carries no structure")
        return self.kernel

    def log_density(self, state: ModelState) -> float:
        """Evaluate the unnormalised log posterior; -inf outside prior support."""
        lp = state.params.log_prior()
        if state.grammar is not None:
            lp += state.grammar.log_prior()
        if not math.isfinite(lp):
            return -math.inf
        model = GPModel(self.kernel_of(state), state.params)
        return lp + log_likelihood(model, self.xs, self.ys)

    def log_likelihood(self, state: ModelState) -> float:
        """GP term alone."""
        return log_likelihood(GPModel(self.kernel_of(state), state.params), self.xs, self.ys)

    def gradient(self, state: ModelState, names: Iterable[str]) -> dict[str, float]:
        """Analytic gradient of :meth:`log_density` in the named hyperparameters."""
        names = list(names)
        model = GPModel(self.kernel_of(state), state.params)
        grads = log_likelihood_gradient(model, self.xs, self.ys, names)
        for name, g in prior_gradient(state.params, names).items():
            grads[name] += g
        return grads


@dataclass
class FunctionTarget:
    """Target defined by a plain function of θ values, with optional gradient."""

    fn: Callable[[Mapping[str, float]], float]
    grad: Callable[[Mapping[str, float]], Mapping[str, float]] | None = None
    calls: int = field(default=0, init=False)

    def log_density(self, state: ModelState) -> float:
        """Prior term plus ``fn`` of the current values."""
        self.calls += 1
        lp = state.params.log_prior()
        if not math.isfinite(lp):
            return -math.inf
        return lp + float(self.fn(state.params.values))

    def gradient(self, state: ModelState, names: Iterable[str]) -> dict[str, float]:
        """Requires ``grad``; the prior gradient is added."""
        if self.grad is None:
            raise ConfigError("this target has no gradient")
        names = list(names)
        g = self.grad(state.params.values)
        prior = prior_gradient(state.params, names)
        return {n: float(g.get(n, 0.0)) + prior[n] for n in names}
