"""A stochastic grammar over kernel compositions, and MH over its choices.

A grammar state holds three kinds of random choice:

* one inclusion bit per base kernel, each Bernoulli(½);
* an ordering of the selected kernels, uniform over permutations;
* one operator bit per join, Bernoulli(p₊); a set bit joins with a sum.

The kernel is the right fold ``k₁ ⊕ (k₂ ⊕ (… ⊕ k_m))``. An empty selection
composes to the set's fallback white-noise kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from gpmem._compat import StrEnum

import numpy as np
from scipy.special import gammaln

from gpmem.core.config import settings
from gpmem.core.errors import ConfigError
from gpmem.core.logging import get_logger
from gpmem.inference.mh import ChainStats, accept, safe_log_density
from gpmem.inference.priors import Gamma
from gpmem.inference.schedule import MHStep, ScopeHandler
from gpmem.inference.state import InferenceTarget, ModelState
from gpmem.kernels.base import BaseKernelKind
from gpmem.kernels.expr import Base, KernelExpr, Product, Sum
from gpmem.kernels.params import HyperParams

log = get_logger(__name__)

GRAMMAR_SCOPE = "grammar"
HYPER_SCOPE = "hyper-parameters"
_LOG_HALF = math.log(0.5)


class ProposalMode(StrEnum):
    """How grammar MH proposes."""

    SINGLE_SITE = "single-site"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class BaseKernelSet:
    """Ordered base kernels the grammar chooses from, plus the empty-selection kernel."""

    entries: tuple[Base, ...]
    fallback: Base

    def __post_init__(self) -> None:
        """Require a non-empty set of distinct kinds and a white-noise fallback."""
        object.__setattr__(self, "entries", tuple(self.entries))
        kinds = [b.kind for b in self.entries]
        if not kinds:
            raise ConfigError("base kernel set must not be empty")
        if len(set(kinds)) != len(kinds):
            raise ConfigError(f"base kernel kinds must be distinct, got {kinds}")
        if self.fallback.kind is not BaseKernelKind.WN:
            raise ConfigError("the empty-selection fallback must be a WN kernel")

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def default(cls) -> tuple[BaseKernelSet, HyperParams]:
        """LIN, PER, SE, WN wired to θ1..θ7, each Gamma(5, 1) in scope ``hyper-parameters``."""
        lin = Base(BaseKernelKind.LIN, ("theta1",))
        per = Base(BaseKernelKind.PER, ("theta2", "theta3", "theta4"))
        se = Base(BaseKernelKind.SE, ("theta5", "theta6"))
        wn = Base(BaseKernelKind.WN, ("theta7",))
        prior = Gamma(5.0, 1.0)
        params = HyperParams.build(
            (f"theta{i}", 5.0, HYPER_SCOPE, prior) for i in range(1, 8)
        )
        return cls((lin, per, se, wn), wn), params

    def restricted(self, kinds: list[BaseKernelKind | str]) -> BaseKernelSet:
        """Subset keeping the listed kinds, in this set's order."""
        wanted = {BaseKernelKind(k) for k in kinds}
        kept = tuple(b for b in self.entries if b.kind in wanted)
        return BaseKernelSet(kept, self.fallback)


@dataclass(frozen=True)
class GrammarState:
    """Inclusion bits, ordering of the selection and operator bits."""

    bk: BaseKernelSet
    include: tuple[int, ...]
    order: tuple[int, ...]
    ops: tuple[int, ...]
    p_plus: float = field(default=0.5)

    def __post_init__(self) -> None:
        """Check the bits agree with each other."""
        selected = sorted(i for i, bit in enumerate(self.include) if bit)
        if len(self.include) != len(self.bk) or sorted(self.order) != selected:
            raise ConfigError("grammar order must be a permutation of the included kernels")
        if len(self.ops) != max(len(self.order) - 1, 0):
            raise ConfigError("grammar needs exactly one operator bit per join")

    @property
    def size(self) -> int:
        """Number of selected base kernels."""
        return len(self.order)

    @property
    def n_sites(self) -> int:
        """Inclusion bits, the ordering, and the operator bits."""
        return len(self.include) + 1 + len(self.ops)

    def kernel(self) -> KernelExpr:
        """Compose the selection by a right fold; empty selection gives the fallback."""
        if not self.order:
            return self.bk.fallback
        kernels = [self.bk.entries[i] for i in self.order]
        acc: KernelExpr = kernels[-1]
        for j in range(len(kernels) - 2, -1, -1):
            acc = Sum(kernels[j], acc) if self.ops[j] else Product(kernels[j], acc)
        return acc

    def log_prior(self) -> float:
        """log p(inclusion bits) + log p(ordering | selection) + log p(operator bits)."""
        lp = len(self.include) * _LOG_HALF - float(gammaln(self.size + 1))
        for bit in self.ops:
            lp += _log_bit(bit, self.p_plus)
        return lp


def _log_bit(bit: int, p: float) -> float:
    q = p if bit else 1.0 - p
    return math.log(q) if q > 0 else -math.inf


def sample_grammar(
    bk: BaseKernelSet, rng: np.random.Generator, p_plus: float | None = None
) -> tuple[GrammarState, KernelExpr]:
    """Draw a grammar state from its prior and return it with its kernel."""
    p = settings.operator_prob if p_plus is None else p_plus
    include = tuple(int(rng.random() < 0.5) for _ in range(len(bk)))
    selected = [i for i, bit in enumerate(include) if bit]
    order = tuple(int(i) for i in rng.permutation(selected)) if selected else ()
    ops = tuple(int(rng.random() < p) for _ in range(max(len(order) - 1, 0)))
    state = GrammarState(bk, include, order, ops, p)
    return state, state.kernel()


# ── proposals ───────────────────────────────────────────────────────────


def _toggle(g: GrammarState, site: int, rng: np.random.Generator) -> tuple[GrammarState, float]:
    """Resample inclusion bit ``site``; returns the proposal and log q(rev) − log q(fwd)."""
    bit = int(rng.random() < 0.5)
    if bit == g.include[site]:
        return g, 0.0
    include = list(g.include)
    include[site] = bit
    order, ops = list(g.order), list(g.ops)
    if bit:
        # insert at a uniform position; the new join's bit goes next to it
        m = len(order)
        pos = int(rng.integers(m + 1))
        order.insert(pos, site)
        log_q = -math.log(m + 1)
        if m >= 1:
            new_bit = int(rng.random() < g.p_plus)
            ops.insert(min(pos, m - 1), new_bit)
            log_q += _log_bit(new_bit, g.p_plus)
        log_ratio = -log_q
    else:
        size = len(order)
        pos = order.index(site)
        order.pop(pos)
        log_q_rev = -math.log(size)
        if size >= 2:
            removed = ops.pop(min(pos, size - 2))
            log_q_rev += _log_bit(removed, g.p_plus)
        log_ratio = log_q_rev
    return replace(g, include=tuple(include), order=tuple(order), ops=tuple(ops)), log_ratio


def _reorder(g: GrammarState, rng: np.random.Generator) -> GrammarState:
    if g.size < 2:
        return g
    return replace(g, order=tuple(int(i) for i in rng.permutation(list(g.order))))


def _flip(g: GrammarState, j: int, rng: np.random.Generator) -> tuple[GrammarState, float]:
    bit = int(rng.random() < g.p_plus)
    if bit == g.ops[j]:
        return g, 0.0
    ops = list(g.ops)
    ops[j] = bit
    return replace(g, ops=tuple(ops)), _log_bit(g.ops[j], g.p_plus) - _log_bit(bit, g.p_plus)


def propose_single_site(
    g: GrammarState, rng: np.random.Generator
) -> tuple[GrammarState, float, str]:
    """Resample one uniformly chosen site from its conditional prior.

    Returns the proposal, log q(rev) − log q(fwd) including the change in
    the number of sites, and the kind of site touched.
    """
    site = int(rng.integers(g.n_sites))
    n_incl = len(g.include)
    if site < n_incl:
        new, log_ratio = _toggle(g, site, rng)
        kind = "inclusion"
    elif site == n_incl:
        new, log_ratio, kind = _reorder(g, rng), 0.0, "order"
    else:
        new, log_ratio = _flip(g, site - n_incl - 1, rng)
        kind = "operator"
    return new, log_ratio + math.log(g.n_sites) - math.log(new.n_sites), kind


def grammar_mh(
    steps: int,
    state: ModelState,
    target: InferenceTarget,
    rng: np.random.Generator,
    stats: ChainStats | None = None,
    mode: ProposalMode | str = ProposalMode.SINGLE_SITE,
) -> ModelState:
    """MH over the grammar choices; θ is left exactly as it is.

    Hyperparameters of kernels leaving the composition stay in the state,
    unused until the kernel is selected again.
    """
    if steps <= 0:
        return state
    if not isinstance(state.grammar, GrammarState):
        raise ConfigError("grammar moves need a state carrying grammar choices")
    mode = ProposalMode(mode)
    stats = stats if stats is not None else ChainStats()
    current, _ = safe_log_density(target, state)
    for _ in range(steps):
        g = state.grammar
        if mode is ProposalMode.INDEPENDENT:
            new, _ = sample_grammar(g.bk, rng, g.p_plus)
            log_q = g.log_prior() - new.log_prior()
        else:
            new, log_q, _kind = propose_single_site(g, rng)
        proposal = state.with_grammar(new)
        proposed, numeric = safe_log_density(target, proposal)
        if accept(proposed - current + log_q, current, rng):
            state, current = proposal, proposed
            stats.record(GRAMMAR_SCOPE, accepted=True)
        else:
            stats.record(GRAMMAR_SCOPE, accepted=False, numeric=numeric)
    return state


def grammar_handler(mode: ProposalMode | str = ProposalMode.SINGLE_SITE) -> ScopeHandler:
    """Schedule handler dispatching ``mh(grammar, k)`` to :func:`grammar_mh`."""

    def handle(
        step: MHStep,
        state: ModelState,
        target: InferenceTarget,
        rng: np.random.Generator,
        stats: ChainStats,
    ) -> ModelState:
        return grammar_mh(step.steps, state, target, rng, stats, mode)

    return handle
