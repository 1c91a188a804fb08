"""Bandit state for Thompson sampling: probed actions, rewards and SE hyperparameters."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np

from gpmem.core.errors import ConfigError, DataError, NumericError
from gpmem.core.logging import get_logger
from gpmem.gp.model import GPModel, log_likelihood
from gpmem.inference.mh import ChainStats, accept
from gpmem.inference.priors import UniformContinuous
from gpmem.kernels.base import BaseKernelKind
from gpmem.kernels.expr import Base
from gpmem.kernels.params import HyperParams
from gpmem.memo.table import MemoTable

log = get_logger(__name__)

BANDIT_SCOPE = "hyper"
SIGMA = "sf"
LENGTH_SCALE = "l"
HYPER_PRIOR = UniformContinuous(0.0, 10.0)
BANDIT_KERNEL = Base(BaseKernelKind.SE, (SIGMA, LENGTH_SCALE))


def bandit_params(sigma: float, length_scale: float) -> HyperParams:
    """θ = (σ, ℓ), both Uniform(0, 10), in scope ``hyper``."""
    return HyperParams.build(
        [
            (SIGMA, sigma, BANDIT_SCOPE, HYPER_PRIOR),
            (LENGTH_SCALE, length_scale, BANDIT_SCOPE, HYPER_PRIOR),
        ]
    )


@dataclass(frozen=True)
class BanditState:
    """Semicontext (σ, ℓ, a, r) of a Thompson-sampling run."""

    actions: tuple[float, ...] = ()
    rewards: tuple[float, ...] = ()
    sigma: float = 1.0
    length_scale: float = 1.0

    def __post_init__(self) -> None:
        """Check history lengths and that σ, ℓ lie inside (0, 10)."""
        object.__setattr__(self, "actions", tuple(float(a) for a in self.actions))
        object.__setattr__(self, "rewards", tuple(float(r) for r in self.rewards))
        if len(self.actions) != len(self.rewards):
            raise DataError("bandit history needs one reward per action")
        for name, value in ((SIGMA, self.sigma), (LENGTH_SCALE, self.length_scale)):
            if not HYPER_PRIOR.in_support(value):
                raise ConfigError(f"bandit {name} must lie in (0, 10), got {value}")

    @classmethod
    def from_table(cls, table: MemoTable, sigma: float, length_scale: float) -> BanditState:
        """History taken from a memo table, in table order."""
        return cls(tuple(table.xs), tuple(table.ys), sigma, length_scale)

    @property
    def params(self) -> HyperParams:
        """θ as a hyperparameter table."""
        return bandit_params(self.sigma, self.length_scale)

    @property
    def model(self) -> GPModel:
        """SE GP with the current θ."""
        return GPModel(BANDIT_KERNEL, self.params)

    def with_hyper(self, sigma: float, length_scale: float) -> BanditState:
        """Copy with new σ, ℓ."""
        return replace(self, sigma=sigma, length_scale=length_scale)

    def with_observation(self, action: float, reward: float) -> BanditState:
        """Copy with one more (action, reward) pair."""
        return replace(
            self, actions=(*self.actions, float(action)), rewards=(*self.rewards, float(reward))
        )

    def best(self) -> tuple[float, float] | None:
        """Action with the highest reward so far (earliest wins ties)."""
        if not self.rewards:
            return None
        i = int(np.argmax(self.rewards))
        return self.actions[i], self.rewards[i]


def log_marginal(state: BanditState) -> float:
    """log P(r | a, σ, ℓ); zero for an empty history."""
    if not state.actions:
        return 0.0
    return log_likelihood(state.model, state.actions, state.rewards)


def _safe(loglik: Callable[[BanditState], float], state: BanditState) -> float:
    try:
        value = float(loglik(state))
    except NumericError as exc:
        log.debug("bayesopt.tau_update.numeric_failure", error=str(exc))
        return -math.inf
    return value if not math.isnan(value) else -math.inf


def tau_update(
    state: BanditState,
    steps: int,
    rng: np.random.Generator,
    stats: ChainStats | None = None,
    loglik: Callable[[BanditState], float] = log_marginal,
) -> BanditState:
    """MH on (σ, ℓ), alternating which one is proposed, starting with σ.

    Proposals are fresh Uniform(0, 10) draws; acceptance uses the full
    marginal-likelihood ratio (quadratic form and determinant). With no
    history every proposal is accepted.
    """
    if steps <= 0:
        return state
    stats = stats if stats is not None else ChainStats()
    current = _safe(loglik, state)
    for step in range(steps):
        value = HYPER_PRIOR.sample(rng, {})
        if step % 2 == 0:
            proposal = state.with_hyper(value, state.length_scale)
        else:
            proposal = state.with_hyper(state.sigma, value)
        if not state.actions:
            rng.random()
            state, current = proposal, 0.0
            stats.record(BANDIT_SCOPE, accepted=True)
            continue
        proposed = _safe(loglik, proposal)
        if accept(proposed - current, current, rng):
            state, current = proposal, proposed
            stats.record(BANDIT_SCOPE, accepted=True)
        else:
            stats.record(BANDIT_SCOPE, accepted=False, numeric=proposed == -math.inf)
    return state
