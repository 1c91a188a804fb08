"""Prior specifications for hyperparameters, including hierarchical Gamma priors.

A Gamma prior's shape and rate are either numbers or the *names* of other
hyperparameters, which is how hyper-hyper parameters (``alpha_sf``,
``beta_sf``, ...) enter the model.
"""

from __future__ import annotations

import math
import re
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, gammaln

from gpmem.core.errors import ConfigError, ParseError

Ref = float | str  # literal value or name of a parent hyperparameter


def _resolve(ref: Ref, values: Mapping[str, float]) -> float:
    if isinstance(ref, str):
        try:
            return float(values[ref])
        except KeyError:
            raise ConfigError(f"prior parent '{ref}' is not a known hyperparameter") from None
    return float(ref)


@dataclass(frozen=True)
class Gamma:
    """Gamma(shape, rate) with density ∝ x^(shape-1) e^(-rate x)."""

    shape: Ref
    rate: Ref

    def __post_init__(self) -> None:
        """Reject non-positive literal shape or rate."""
        for ref in (self.shape, self.rate):
            if not isinstance(ref, str) and not ref > 0:
                raise ConfigError(f"gamma prior needs positive shape and rate, got {self}")

    @property
    def parents(self) -> tuple[str, ...]:
        """Names of hyperparameters this prior depends on."""
        return tuple(r for r in (self.shape, self.rate) if isinstance(r, str))

    def in_support(self, value: float) -> bool:
        """Strictly positive reals."""
        return value > 0 and math.isfinite(value)

    def logpdf(self, value: float, values: Mapping[str, float]) -> float:
        """Log density at ``value`` given the current parent values."""
        a, b = _resolve(self.shape, values), _resolve(self.rate, values)
        if not self.in_support(value) or a <= 0 or b <= 0:
            return -math.inf
        return float(a * math.log(b) - gammaln(a) + (a - 1.0) * math.log(value) - b * value)

    def sample(self, rng: np.random.Generator, values: Mapping[str, float]) -> float:
        """Draw from the prior conditional on the parents."""
        a, b = _resolve(self.shape, values), _resolve(self.rate, values)
        return float(rng.gamma(a, 1.0 / b))

    def grad_value(self, value: float, values: Mapping[str, float]) -> float:
        """d/dx log p(x)."""
        a, b = _resolve(self.shape, values), _resolve(self.rate, values)
        return (a - 1.0) / value - b

    def grad_parents(self, value: float, values: Mapping[str, float]) -> dict[str, float]:
        """d/d(parent) log p(x) for each named parent."""
        a, b = _resolve(self.shape, values), _resolve(self.rate, values)
        grads: dict[str, float] = {}
        if isinstance(self.shape, str):
            grads[self.shape] = grads.get(self.shape, 0.0) + (
                math.log(b) + math.log(value) - float(digamma(a))
            )
        if isinstance(self.rate, str):
            grads[self.rate] = grads.get(self.rate, 0.0) + (a / b - value)
        return grads

    def lower_bound(self) -> float:
        """Infimum of the support."""
        return 0.0

    def upper_bound(self) -> float:
        """Supremum of the support."""
        return math.inf

    def __str__(self) -> str:
        return f"gamma({self.shape}, {self.rate})"


@dataclass(frozen=True)
class UniformContinuous:
    """Uniform on the open interval (lo, hi)."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        """Reject empty intervals."""
        if not self.lo < self.hi:
            raise ConfigError(f"uniform prior needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def parents(self) -> tuple[str, ...]:
        """Uniform priors are never hierarchical."""
        return ()

    def in_support(self, value: float) -> bool:
        """Open interval membership."""
        return self.lo < value < self.hi

    def logpdf(self, value: float, values: Mapping[str, float]) -> float:
        """Log density; -inf outside the interval."""
        if not self.in_support(value):
            return -math.inf
        return -math.log(self.hi - self.lo)

    def sample(self, rng: np.random.Generator, values: Mapping[str, float]) -> float:
        """Draw uniformly from the interval."""
        return float(rng.uniform(self.lo, self.hi))

    def grad_value(self, value: float, values: Mapping[str, float]) -> float:
        """Flat density."""
        return 0.0

    def grad_parents(self, value: float, values: Mapping[str, float]) -> dict[str, float]:
        """No parents."""
        return {}

    def lower_bound(self) -> float:
        """Infimum of the support."""
        return self.lo

    def upper_bound(self) -> float:
        """Supremum of the support."""
        return self.hi

    def __str__(self) -> str:
        return f"uniform({self.lo}, {self.hi})"


@dataclass(frozen=True)
class Bernoulli:
    """Bernoulli(p) over {0, 1}; used for grammar choice sites."""

    p: float = 0.5

    def __post_init__(self) -> None:
        """Reject probabilities outside [0, 1]."""
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"bernoulli prior needs p in [0, 1], got {self.p}")

    @property
    def parents(self) -> tuple[str, ...]:
        """Bernoulli priors are never hierarchical."""
        return ()

    def in_support(self, value: float) -> bool:
        """Only 0 and 1."""
        return value in (0, 1)

    def logpdf(self, value: float, values: Mapping[str, float] | None = None) -> float:
        """Log mass of ``value``."""
        if value == 1:
            return math.log(self.p) if self.p > 0 else -math.inf
        if value == 0:
            return math.log1p(-self.p) if self.p < 1 else -math.inf
        return -math.inf

    def sample(self, rng: np.random.Generator, values: Mapping[str, float] | None = None) -> int:
        """Draw a bit."""
        return int(rng.random() < self.p)

    def __str__(self) -> str:
        return f"bernoulli({self.p})"


PriorSpec = Gamma | UniformContinuous | Bernoulli
ContinuousPrior = Gamma | UniformContinuous

_PRIOR_RE = re.compile(r"^\s*(gamma|uniform|uniform_continuous|bernoulli)\s*\((.*)\)\s*$")


def _ref(token: str) -> Ref:
    token = token.strip()
    try:
        return float(token)
    except ValueError:
        return token


def parse_prior(text: str) -> PriorSpec:
    """Parse a prior such as ``gamma(5,1)``, ``gamma(alpha_sf, beta_sf)`` or ``uniform(0,10)``."""
    match = _PRIOR_RE.match(text)
    if match is None:
        raise ParseError("unrecognised prior", text, 0)
    kind, body = match.groups()
    args = [_ref(a) for a in body.split(",")] if body.strip() else []
    if kind == "gamma" and len(args) == 2:
        return Gamma(*args)
    if kind.startswith("uniform") and len(args) == 2 and all(isinstance(a, float) for a in args):
        return UniformContinuous(float(args[0]), float(args[1]))
    if kind == "bernoulli" and len(args) <= 1:
        return Bernoulli(float(args[0]) if args else 0.5)
    raise ParseError(f"bad arguments for {kind} prior", text, match.start(2))
