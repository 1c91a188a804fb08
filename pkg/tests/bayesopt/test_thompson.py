"""Tests for the Thompson-sampling optimisation loop."""

import numpy as np
import pytest
from pydantic import ValidationError

from gpmem.bayesopt.thompson import BayesOptConfig, thompson_run
from gpmem.core.errors import SourceFunctionError
from gpmem.core.schemas import SearchMode
from gpmem.objectives.builtin import DemoObjective, demo_function


def _config(**overrides):
    base = dict(iterations=15, candidates=10, update_steps=10, grid_size=64)
    return BayesOptConfig(**(base | overrides))


class FailsOnSecondCall:
    def __init__(self, error=None):
        self.calls = 0
        self.error = error

    def __call__(self, x):
        self.calls += 1
        if self.calls == 2:
            raise self.error or SourceFunctionError(x, "simulated outage")
        return -x * x


class TestBayesOptConfig:
    def test_defaults_from_settings(self):
        config = BayesOptConfig()
        assert (config.lo, config.hi) == (-20.0, 20.0)
        assert config.mode is SearchMode.UNIFORM

    @pytest.mark.parametrize(("lo", "hi"), [(1.0, 1.0), (2.0, -2.0)])
    def test_bounds_must_be_ordered(self, lo, hi):
        with pytest.raises(ValidationError, match="lo < hi"):
            BayesOptConfig(lo=lo, hi=hi)

    def test_mode_from_string(self):
        assert BayesOptConfig(mode="tau-search").mode is SearchMode.TAU_SEARCH


class TestThompsonRun:
    def test_demo_trace(self, rng):
        objective = DemoObjective()
        seen = []
        trace = thompson_run(objective, _config(), rng, on_iteration=seen.append)
        assert len(trace) == 15
        assert seen == trace
        assert [r.iteration for r in trace] == list(range(15))
        best = [r.best_reward for r in trace]
        assert best == sorted(best)
        for i, record in enumerate(trace):
            assert record.reward == pytest.approx(demo_function(record.action))
            assert record.best_reward == max(r.reward for r in trace[: i + 1])
            assert -20.0 <= record.action <= 20.0
            assert -20.0 <= record.grid_argmax <= 20.0
            assert 0.0 < record.sigma < 10.0
        assert objective.calls <= 15

    def test_seed_determinism(self):
        runs = [
            thompson_run(DemoObjective(), _config(iterations=6), np.random.default_rng(7))
            for _ in range(2)
        ]
        assert runs[0] == runs[1]

    @pytest.mark.parametrize("mode", [SearchMode.DRIFT, SearchMode.TAU_SEARCH])
    def test_other_search_modes(self, rng, mode):
        config = _config(
            iterations=5, mode=mode, lo=-5.0, hi=5.0, search_steps=5, n_avg=2, drift_width=0.5
        )
        trace = thompson_run(DemoObjective(), config, rng)
        assert len(trace) == 5
        assert all(-5.0 <= r.action <= 5.0 for r in trace)

    def test_failed_probe_is_skipped(self, rng):
        trace = thompson_run(FailsOnSecondCall(), _config(iterations=5), rng)
        assert [r.iteration for r in trace] == [0, 2, 3, 4]

    @pytest.mark.parametrize("error", [LookupError("no row"), AttributeError("gone")])
    def test_any_source_exception_skips_the_iteration(self, rng, error):
        trace = thompson_run(FailsOnSecondCall(error), _config(iterations=5), rng)
        assert [r.iteration for r in trace] == [0, 2, 3, 4]

    def test_stop_on_failure(self, rng):
        trace = thompson_run(FailsOnSecondCall(), _config(iterations=5, stop_on_failure=True), rng)
        assert [r.iteration for r in trace] == [0]

    def test_zero_iterations(self, rng):
        assert thompson_run(DemoObjective(), _config(iterations=0), rng) == []

    @pytest.mark.slow
    def test_uniform_search_finds_the_global_maximum(self):
        grid = np.linspace(-20.0, 20.0, 10_000)
        optimum = grid[int(np.argmax([demo_function(x) for x in grid]))]
        config = BayesOptConfig(iterations=15, mode="uniform")
        hits = 0
        for seed in range(20):
            trace = thompson_run(DemoObjective(), config, np.random.default_rng(seed))
            hits += abs(trace[-1].best_action - optimum) <= 1.0
        assert hits >= 16
