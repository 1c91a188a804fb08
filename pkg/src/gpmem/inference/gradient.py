"""Gradient ascent on the log target with backtracking step control."""

from __future__ import annotations

import math
from typing import Protocol

from gpmem.core.config import settings
from gpmem.core.errors import NumericError
from gpmem.core.logging import get_logger
from gpmem.inference.mh import ChainStats, safe_log_density, scope_members
from gpmem.inference.state import ModelState

log = get_logger(__name__)


class DifferentiableTarget(Protocol):
    """A target that also supplies ∂ log density / ∂θ."""

    def log_density(self, state: ModelState) -> float: ...

    def gradient(self, state: ModelState, names: list[str]) -> dict[str, float]: ...


def _bounds(state: ModelState, name: str) -> tuple[float, float]:
    prior = state.params.priors[name]
    if prior is None:
        return 0.0, math.inf
    return max(prior.lower_bound(), 0.0), prior.upper_bound()


def _clamp(value: float, current: float, lo: float, hi: float) -> float:
    # Overshooting a boundary moves halfway towards it instead.
    if value <= lo:
        return 0.5 * (current + lo)
    if value >= hi:
        return 0.5 * (current + hi)
    return value


def gradient_ascent(
    scope: str,
    steps: int,
    step_size: float,
    state: ModelState,
    target: DifferentiableTarget,
    stats: ChainStats | None = None,
    max_halvings: int | None = None,
) -> ModelState:
    """Take ``steps`` ascent steps on the members of ``scope``.

    A step that lowers the target is retried at half the step size, up to
    ``max_halvings`` times; if none succeeds the state is kept.

    Raises:
        NumericError: the gradient is non-finite; names the parameter.
    """
    if steps <= 0:
        return state
    names = scope_members(state, scope, need_prior=False)
    halvings = settings.gradient_max_halvings if max_halvings is None else max_halvings
    stats = stats if stats is not None else ChainStats()
    current, _ = safe_log_density(target, state)
    for step in range(steps):
        grads = target.gradient(state, names)
        for name in names:
            if not math.isfinite(grads[name]):
                raise NumericError(f"non-finite gradient for parameter '{name}'")
        eta = step_size
        moved = False
        for _ in range(halvings + 1):
            updates = {}
            for name in names:
                value = state.params[name]
                lo, hi = _bounds(state, name)
                updates[name] = _clamp(value + eta * grads[name], value, lo, hi)
            proposal = state.with_params(state.params.with_values(updates))
            proposed, _ = safe_log_density(target, proposal)
            if proposed >= current:
                state, current, moved = proposal, proposed, True
                break
            eta *= 0.5
        stats.record(scope, accepted=moved)
        if not moved:
            log.debug("gradient.step.stalled", scope=scope, step=step, log_target=current)
    return state
