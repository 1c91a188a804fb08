"""Tests for the kernel-composition grammar and its MH moves."""

import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import binom

from gpmem.core.errors import ConfigError
from gpmem.inference.mh import ChainStats
from gpmem.inference.state import GPTarget, ModelState
from gpmem.kernels.base import BaseKernelKind
from gpmem.kernels.expr import Base
from gpmem.structure.grammar import (
    GRAMMAR_SCOPE,
    BaseKernelSet,
    GrammarState,
    ProposalMode,
    grammar_mh,
    sample_grammar,
)


class PriorOnly:
    """Target with a flat likelihood: the chain should sample the grammar prior."""

    def log_density(self, state):
        return state.grammar.log_prior()


@pytest.fixture
def default_set():
    return BaseKernelSet.default()


class TestBaseKernelSet:
    def test_default(self, default_set):
        bk, params = default_set
        assert [b.kind for b in bk.entries] == [
            BaseKernelKind.LIN,
            BaseKernelKind.PER,
            BaseKernelKind.SE,
            BaseKernelKind.WN,
        ]
        assert len(params) == 7
        assert params.scope_members("hyper-parameters") == [f"theta{i}" for i in range(1, 8)]
        assert bk.fallback.kind is BaseKernelKind.WN

    def test_restricted_keeps_order(self, default_set):
        bk, _ = default_set
        small = bk.restricted(["WN", "LIN"])
        assert [b.kind for b in small.entries] == [BaseKernelKind.LIN, BaseKernelKind.WN]

    def test_rejects_empty(self, default_set):
        bk, _ = default_set
        with pytest.raises(ConfigError, match="must not be empty"):
            BaseKernelSet((), bk.fallback)

    def test_rejects_duplicates(self, default_set):
        bk, _ = default_set
        with pytest.raises(ConfigError, match="distinct"):
            BaseKernelSet((bk.entries[0], bk.entries[0]), bk.fallback)

    def test_fallback_must_be_noise(self, default_set):
        bk, _ = default_set
        with pytest.raises(ConfigError, match="WN"):
            BaseKernelSet(bk.entries, Base(BaseKernelKind.LIN, ("x",)))


class TestGrammarState:
    def test_right_fold(self, default_set):
        bk, _ = default_set
        g = GrammarState(bk, (1, 1, 1, 1), (0, 1, 2, 3), (1, 0, 1))
        assert str(g.kernel()) == (
            "LIN(theta1) + PER(theta2,theta3,theta4) * (SE(theta5,theta6) + WN(theta7))"
        )

    def test_empty_selection_is_fallback(self, default_set):
        bk, _ = default_set
        assert GrammarState(bk, (0, 0, 0, 0), (), ()).kernel() == bk.fallback

    def test_singleton(self, default_set):
        bk, _ = default_set
        assert GrammarState(bk, (1, 0, 0, 0), (0,), ()).kernel() == bk.entries[0]

    def test_log_prior(self, default_set):
        bk, _ = default_set
        g = GrammarState(bk, (1, 0, 1, 1), (3, 0, 2), (1, 0), p_plus=0.25)
        expected = 4 * math.log(0.5) - math.log(6) + math.log(0.25) + math.log(0.75)
        assert g.log_prior() == pytest.approx(expected)

    def test_order_must_match_selection(self, default_set):
        bk, _ = default_set
        with pytest.raises(ConfigError, match="permutation"):
            GrammarState(bk, (1, 1, 0, 0), (0, 2), (1,))

    def test_operator_count(self, default_set):
        bk, _ = default_set
        with pytest.raises(ConfigError, match="operator bit"):
            GrammarState(bk, (1, 1, 0, 0), (0, 1), ())


class TestSampleGrammar:
    def test_prior_marginals(self, default_set, rng):
        bk, _ = default_set
        states = [sample_grammar(bk, rng)[0] for _ in range(20000)]
        inclusion = np.mean([g.include for g in states], axis=0)
        np.testing.assert_allclose(inclusion, 0.5, atol=0.015)
        ops = [bit for g in states for bit in g.ops]
        assert np.mean(ops) == pytest.approx(0.5, abs=0.015)

    def test_kernel_matches_state(self, default_set, rng):
        bk, _ = default_set
        for _ in range(20):
            g, kernel = sample_grammar(bk, rng)
            assert kernel == g.kernel()

    def test_operator_probability(self, default_set, rng):
        bk, _ = default_set
        ops = [b for _ in range(5000) for b in sample_grammar(bk, rng, p_plus=0.8)[0].ops]
        assert np.mean(ops) == pytest.approx(0.8, abs=0.03)


class TestGrammarMH:
    @pytest.mark.parametrize("mode", list(ProposalMode))
    def test_flat_likelihood_recovers_prior(self, default_set, rng, mode):
        bk, params = default_set
        state = ModelState(params, GrammarState(bk, (0, 0, 0, 0), (), ()))
        sizes = Counter()
        orders = Counter()
        for _ in range(30000):
            state = grammar_mh(1, state, PriorOnly(), rng, mode=mode)
            sizes[state.grammar.size] += 1
            if state.grammar.include == (1, 1, 0, 0):
                orders[state.grammar.order] += 1
        total = sum(sizes.values())
        for k in range(5):
            assert sizes[k] / total == pytest.approx(binom.pmf(k, 4, 0.5), abs=0.02)
        assert orders[(0, 1)] / sum(orders.values()) == pytest.approx(0.5, abs=0.06)

    @pytest.mark.slow
    def test_two_state_posterior_matches_enumeration(self, default_set, rng):
        bk, params = default_set
        small = bk.restricted(["LIN"])
        target = GPTarget.from_data([0.8], [3.0])
        states = {
            "WN": ModelState(params, GrammarState(small, (0,), (), ())),
            "LIN": ModelState(params, GrammarState(small, (1,), (0,), ())),
        }
        logs = {k: target.log_density(s) for k, s in states.items()}
        norm = np.logaddexp(logs["WN"], logs["LIN"])
        exact = math.exp(logs["LIN"] - norm)
        state = states["WN"]
        hits = 0
        for _ in range(20000):
            state = grammar_mh(1, state, target, rng)
            hits += state.grammar.size
        assert abs(hits / 20000 - exact) < 0.05

    @pytest.mark.slow
    def test_two_state_detailed_balance(self, default_set, rng):
        bk, params = default_set
        small = bk.restricted(["LIN"])
        target = GPTarget.from_data([0.8, -1.1], [3.0, -2.5])
        states = [
            ModelState(params, GrammarState(small, (0,), (), ())),
            ModelState(params, GrammarState(small, (1,), (0,), ())),
        ]
        logs = np.array([target.log_density(s) for s in states])
        pi = np.exp(logs - np.logaddexp(*logs))
        visits = np.zeros(2)
        moves = np.zeros(2)
        state = states[0]
        for _ in range(20000):
            here = state.grammar.size
            state = grammar_mh(1, state, target, rng)
            visits[here] += 1
            moves[here] += state.grammar.size != here
        p = moves / visits
        flow = pi * p
        se = pi * np.sqrt(p * (1 - p) / visits)
        assert abs(flow[0] - flow[1]) < 3 * math.hypot(*se) + 1e-12

    def test_theta_untouched(self, default_set, rng):
        bk, params = default_set
        state = ModelState(params, sample_grammar(bk, rng)[0])
        stats = ChainStats()
        out = grammar_mh(50, state, PriorOnly(), rng, stats)
        assert out.params is params
        assert stats.proposals[GRAMMAR_SCOPE] == 50

    def test_zero_steps(self, default_set, rng):
        bk, params = default_set
        state = ModelState(params, sample_grammar(bk, rng)[0])
        assert grammar_mh(0, state, PriorOnly(), rng) is state

    def test_needs_grammar(self, default_set, rng):
        _, params = default_set
        with pytest.raises(ConfigError, match="grammar"):
            grammar_mh(1, ModelState(params), PriorOnly(), rng)
