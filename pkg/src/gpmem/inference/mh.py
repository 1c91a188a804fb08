"""Scope-tagged single-site Metropolis–Hastings over hyperparameters."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from gpmem.core.errors import ConfigError, NumericError
from gpmem.core.logging import get_logger
from gpmem.inference.state import InferenceTarget, ModelState

log = get_logger(__name__)


@dataclass
class ChainStats:
    """Per-scope proposal, acceptance and numeric-rejection counters."""

    proposals: Counter[str] = field(default_factory=Counter)
    accepted: Counter[str] = field(default_factory=Counter)
    numeric_rejections: Counter[str] = field(default_factory=Counter)

    def record(self, scope: str, accepted: bool, numeric: bool = False) -> None:
        """Count one transition."""
        self.proposals[scope] += 1
        if accepted:
            self.accepted[scope] += 1
        if numeric:
            self.numeric_rejections[scope] += 1

    def acceptance_rate(self, scope: str) -> float:
        """Accepted / proposed; 0 when nothing was proposed."""
        n = self.proposals[scope]
        return self.accepted[scope] / n if n else 0.0

    def summary(self) -> dict[str, Any]:
        """Plain-dict view for logs and result files."""
        return {
            scope: {
                "proposals": self.proposals[scope],
                "accepted": self.accepted[scope],
                "numeric_rejections": self.numeric_rejections[scope],
                "acceptance_rate": round(self.acceptance_rate(scope), 4),
            }
            for scope in sorted(self.proposals)
        }


def safe_log_density(target: InferenceTarget, state: ModelState) -> tuple[float, bool]:
    """Evaluate the target, mapping numeric failures to ``(-inf, True)``."""
    try:
        value = float(target.log_density(state))
    except NumericError as exc:
        log.debug("mh.target.numeric_failure", error=str(exc))
        return -math.inf, True
    if math.isnan(value):
        return -math.inf, True
    return value, False


def accept(log_ratio: float, current: float, rng: np.random.Generator) -> bool:
    """Metropolis test; any finite proposal beats a current state of zero density."""
    u = rng.random()
    if math.isnan(log_ratio):
        return False
    if current == -math.inf:
        return log_ratio > -math.inf
    return math.log(u) < log_ratio if u > 0.0 else True


def scope_members(state: ModelState, scope: str, need_prior: bool) -> list[str]:
    """Names in ``scope``; raises ConfigError when there are none to move."""
    names = state.params.scope_members(scope)
    if need_prior:
        names = [n for n in names if state.params.priors[n] is not None]
    if not names:
        raise ConfigError(
            f"scope '{scope}' has no {'random ' if need_prior else ''}members; "
            f"known scopes: {', '.join(sorted(state.params.scope_tags))}"
        )
    return names


def mh(
    scope: str,
    steps: int,
    state: ModelState,
    target: InferenceTarget,
    rng: np.random.Generator,
    stats: ChainStats | None = None,
) -> ModelState:
    """``steps`` single-site MH transitions with prior proposals.

    Each step resamples one member of ``scope`` from its prior given the
    current parents. Children of the member keep their values; their prior
    density under the new parent enters through the target.
    """
    if steps <= 0:
        return state
    names = scope_members(state, scope, need_prior=True)
    stats = stats if stats is not None else ChainStats()
    current, _ = safe_log_density(target, state)
    for _ in range(steps):
        params = state.params
        name = names[int(rng.integers(len(names)))]
        prior = params.priors[name]
        assert prior is not None
        old = params[name]
        new = prior.sample(rng, params.values)
        if not (prior.in_support(new) and new > 0.0):
            rng.random()
            stats.record(scope, accepted=False)
            continue
        proposal = state.with_params(params.with_value(name, new))
        proposed, numeric = safe_log_density(target, proposal)
        log_q = prior.logpdf(old, params.values) - prior.logpdf(new, params.values)
        if accept(proposed - current + log_q, current, rng):
            state, current = proposal, proposed
            stats.record(scope, accepted=True)
        else:
            stats.record(scope, accepted=False, numeric=numeric)
            if numeric:
                log.debug("mh.step.rejected", scope=scope, param=name, reason="numeric")
    return state


def mh_drift(
    scope: str,
    steps: int,
    width: float,
    state: ModelState,
    target: InferenceTarget,
    rng: np.random.Generator,
    stats: ChainStats | None = None,
) -> ModelState:
    """Random-walk MH with symmetric N(θ, width²) proposals.

    Proposals outside the prior's support (or non-positive, for members with
    no prior) are rejected without evaluating the target.
    """
    if steps <= 0:
        return state
    if width < 0:
        raise ConfigError(f"drift width must be non-negative, got {width}")
    names = scope_members(state, scope, need_prior=False)
    stats = stats if stats is not None else ChainStats()
    current, _ = safe_log_density(target, state)
    for _ in range(steps):
        params = state.params
        name = names[int(rng.integers(len(names)))]
        prior = params.priors[name]
        new = params[name] + width * float(rng.standard_normal())
        inside = new > 0.0 and math.isfinite(new) and (prior is None or prior.in_support(new))
        if not inside:
            rng.random()
            stats.record(scope, accepted=False)
            continue
        proposal = state.with_params(params.with_value(name, new))
        proposed, numeric = safe_log_density(target, proposal)
        if accept(proposed - current, current, rng):
            state, current = proposal, proposed
            stats.record(scope, accepted=True)
        else:
            stats.record(scope, accepted=False, numeric=numeric)
    return state
