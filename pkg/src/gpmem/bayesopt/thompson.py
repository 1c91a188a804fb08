"""Thompson-sampling Bayesian optimisation driven by a gpmem emulator.

Each iteration refreshes (σ, ℓ) by MH, searches for an action with the
configured strategy, and probes the true objective there through the
memoising prober. Probed pairs are the bandit history.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
from pydantic import BaseModel, Field, model_validator

from gpmem.bayesopt.bandit import (
    BANDIT_KERNEL,
    HYPER_PRIOR,
    BanditState,
    bandit_params,
    tau_update,
)
from gpmem.bayesopt.search import mc_argmax, posterior_mean_argmax, tau_search
from gpmem.core.config import settings
from gpmem.core.errors import ConfigError, GpmemError, SourceFunctionError
from gpmem.core.logging import get_logger
from gpmem.core.schemas import SearchMode, TraceRecord
from gpmem.inference.mh import ChainStats
from gpmem.memo.gpmem import SourceFunction, gpmem

log = get_logger(__name__)


class BayesOptConfig(BaseModel):
    """Knobs of one optimisation run; defaults come from the settings."""

    lo: float = Field(default_factory=lambda: settings.bo_lo)
    hi: float = Field(default_factory=lambda: settings.bo_hi)
    iterations: int = Field(default_factory=lambda: settings.bo_iterations, ge=0)
    candidates: int = Field(default_factory=lambda: settings.bo_candidates, ge=1)
    update_steps: int = Field(default_factory=lambda: settings.bo_update_steps, ge=0)
    temperature: float = Field(default_factory=lambda: settings.bo_temperature, gt=0.0)
    n_avg: int = Field(default_factory=lambda: settings.bo_navg, ge=1)
    drift_width: float = Field(default_factory=lambda: settings.bo_drift_width, gt=0.0)
    search_steps: int = Field(default_factory=lambda: settings.bo_search_steps, ge=0)
    grid_size: int = Field(default_factory=lambda: settings.bo_grid_size, ge=2)
    mode: SearchMode = SearchMode.UNIFORM
    stop_on_failure: bool = Field(
        default=False, description="End the run at the first failed probe instead of skipping it"
    )

    @model_validator(mode="after")
    def check_bounds(self) -> BayesOptConfig:
        """Require lo < hi."""
        if not self.lo < self.hi:
            raise ValueError(f"action bounds need lo < hi, got [{self.lo}, {self.hi}]")
        return self


def _choose_action(
    state: BanditState,
    sampler: Callable[[float], float],
    last_action: float,
    config: BayesOptConfig,
    rng: np.random.Generator,
    stats: ChainStats,
) -> float:
    if config.mode is SearchMode.TAU_SEARCH:
        return tau_search(
            state,
            last_action,
            config.search_steps,
            config.temperature,
            config.drift_width,
            config.n_avg,
            rng,
            lo=config.lo,
            hi=config.hi,
            stats=stats,
        )
    return mc_argmax(
        sampler,
        config.mode,
        last_action,
        rng,
        n=config.candidates,
        lo=config.lo,
        hi=config.hi,
        width=config.drift_width,
    )


def thompson_run(
    objective: SourceFunction,
    config: BayesOptConfig,
    rng: np.random.Generator,
    on_iteration: Callable[[TraceRecord], None] | None = None,
) -> list[TraceRecord]:
    """Run ``config.iterations`` Sample / Search / Update rounds and return the trace.

    The first action of a run with no history is uniform over the bounds.
    An iteration whose probe fails is logged and skipped; history and θ are
    left as they were before it.
    """
    if config.lo >= config.hi:
        raise ConfigError("action bounds need lo < hi")
    sigma = HYPER_PRIOR.sample(rng, {})
    length_scale = HYPER_PRIOR.sample(rng, {})
    prober, emulator = gpmem(objective, BANDIT_KERNEL, bandit_params(sigma, length_scale))
    state = BanditState(sigma=sigma, length_scale=length_scale)
    grid = np.linspace(config.lo, config.hi, config.grid_size)
    stats = ChainStats()
    trace: list[TraceRecord] = []
    last_action: float | None = None

    for iteration in range(config.iterations):
        try:
            updated = tau_update(state, config.update_steps, rng, stats)
            emulator.set_model(params=updated.params)
            if not updated.actions:
                action = float(rng.uniform(config.lo, config.hi))
            else:
                start = last_action if last_action is not None else updated.actions[-1]
                action = _choose_action(
                    updated,
                    lambda x: emulator.emulate_pointwise(x, rng),
                    start,
                    config,
                    rng,
                    stats,
                )
            reward = prober.compute(action)
        except GpmemError as exc:
            emulator.set_model(params=state.params)
            log.exception("bayesopt.iteration.aborted", iteration=iteration)
            if config.stop_on_failure and isinstance(exc, SourceFunctionError):
                log.warning("bayesopt.run.stopped", iteration=iteration, completed=len(trace))
                break
            continue

        state = BanditState.from_table(prober.table, updated.sigma, updated.length_scale)
        last_action = action
        best = state.best()
        assert best is not None
        record = TraceRecord(
            iteration=iteration,
            action=action,
            reward=reward,
            sigma=state.sigma,
            length_scale=state.length_scale,
            best_action=best[0],
            best_reward=best[1],
            grid_argmax=posterior_mean_argmax(state, grid),
        )
        trace.append(record)
        log.info(
            "bayesopt.iteration",
            iteration=iteration,
            action=round(action, 4),
            reward=round(reward, 4),
            best_reward=round(best[1], 4),
        )
        if on_iteration is not None:
            on_iteration(record)

    log.info(
        "bayesopt.complete",
        iterations=len(trace),
        probes=prober.calls,
        hyper_acceptance=round(stats.acceptance_rate("hyper"), 3),
    )
    return trace
