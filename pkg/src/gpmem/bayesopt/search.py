"""Action search: Monte Carlo argmax over emulator draws, and the τ-search chain."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence

import numpy as np

from gpmem.bayesopt.bandit import BanditState
from gpmem.core.config import settings
from gpmem.core.errors import ConfigError, NumericError
from gpmem.core.logging import get_logger
from gpmem.core.schemas import SearchMode
from gpmem.gp.linalg import jittered_cholesky
from gpmem.gp.model import PosteriorGaussian, posterior
from gpmem.inference.mh import ChainStats, accept

log = get_logger(__name__)

TAU_SEARCH_SCOPE = "tau-search"

PointSampler = Callable[[float], float]


def posterior_at(state: BanditState, xq: Sequence[float] | np.ndarray) -> PosteriorGaussian:
    """Posterior of the reward function at ``xq`` given the bandit history."""
    return posterior(state.model, state.actions, state.rewards, xq)


def mu_tilde(x: float, state: BanditState, n_avg: int, rng: np.random.Generator) -> float:
    """Mean of ``n_avg`` independent posterior draws of the reward at ``x``."""
    if n_avg < 1:
        raise ConfigError(f"n_avg must be at least 1, got {n_avg}")
    post = posterior_at(state, [x])
    scale = float(jittered_cholesky(post.cov).L[0, 0])
    return float(np.mean(post.mean[0] + scale * rng.standard_normal(n_avg)))


def tau_search(
    state: BanditState,
    x_current: float,
    steps: int,
    temperature: float,
    width: float,
    n_avg: int,
    rng: np.random.Generator,
    *,
    lo: float | None = None,
    hi: float | None = None,
    mu: Callable[[float], float] | None = None,
    stats: ChainStats | None = None,
) -> float:
    """Walk from ``x_current`` with N(x, width²) proposals; return the final action.

    A proposal is accepted with probability min(1, exp((μ̃(x′) − μ̃(x)) / s)).
    Proposals outside ``[lo, hi]`` and proposals whose estimate fails
    numerically are rejected. The current point's estimate is kept, not
    re-drawn, while the chain stays there.
    """
    if not temperature > 0:
        raise ConfigError(f"tau-search temperature must be positive, got {temperature}")
    lo = settings.bo_lo if lo is None else lo
    hi = settings.bo_hi if hi is None else hi
    estimate = mu if mu is not None else (lambda x: mu_tilde(x, state, n_avg, rng))
    stats = stats if stats is not None else ChainStats()
    x = float(x_current)
    current = estimate(x)
    for _ in range(steps):
        proposal = x + width * float(rng.standard_normal())
        if not lo <= proposal <= hi:
            rng.random()
            stats.record(TAU_SEARCH_SCOPE, accepted=False)
            continue
        try:
            value = float(estimate(proposal))
        except NumericError:
            rng.random()
            stats.record(TAU_SEARCH_SCOPE, accepted=False, numeric=True)
            continue
        gap = (value - current) / temperature
        if accept(gap if math.isfinite(gap) else -math.inf, 0.0, rng):
            x, current = proposal, value
            stats.record(TAU_SEARCH_SCOPE, accepted=True)
        else:
            stats.record(TAU_SEARCH_SCOPE, accepted=False)
    return x


def candidates(
    mode: SearchMode | str,
    rng: np.random.Generator,
    last_action: float | None = None,
    *,
    n: int | None = None,
    lo: float | None = None,
    hi: float | None = None,
    width: float = 1.0,
) -> np.ndarray:
    """Candidate actions: uniform over the bounds, or N(last_action, width²) clipped to them."""
    n = settings.bo_candidates if n is None else n
    lo = settings.bo_lo if lo is None else lo
    hi = settings.bo_hi if hi is None else hi
    mode = SearchMode(mode)
    if mode is SearchMode.UNIFORM:
        return rng.uniform(lo, hi, size=n)
    if mode is SearchMode.DRIFT:
        if last_action is None:
            raise ConfigError("drift candidates need a previous action")
        return np.clip(last_action + width * rng.standard_normal(n), lo, hi)
    raise ConfigError(f"mc_argmax does not support mode '{mode}'")


def mc_argmax(
    sampler: PointSampler,
    mode: SearchMode | str,
    last_action: float | None,
    rng: np.random.Generator,
    *,
    n: int | None = None,
    lo: float | None = None,
    hi: float | None = None,
    width: float = 1.0,
) -> float:
    """Candidate whose single emulator draw is largest; the lowest index wins ties."""
    xs = candidates(mode, rng, last_action, n=n, lo=lo, hi=hi, width=width)
    ys = np.array([sampler(float(x)) for x in xs])
    return float(xs[int(np.argmax(ys))])


def posterior_mean_argmax(state: BanditState, grid: Sequence[float] | np.ndarray) -> float:
    """Grid point with the highest posterior mean."""
    grid = np.asarray(grid, dtype=float)
    return float(grid[int(np.argmax(posterior_at(state, grid).mean))])
