"""Tests for the prober/emulator pair and its shared memo table."""

import math

import numpy as np
import pytest

from gpmem.core.errors import SourceFunctionError
from gpmem.core.schemas import Origin
from gpmem.gp.linalg import jittered_cholesky
from gpmem.gp.model import posterior
from gpmem.kernels.params import HyperParams
from gpmem.kernels.text import parse_kernel
from gpmem.memo.gpmem import gpmem
from gpmem.memo.table import MemoTable

KERNEL = parse_kernel("SE(sf, l) + WN(sigma)")


@pytest.fixture
def params():
    return HyperParams.build(
        [("sf", 1.0, "hyper", None), ("l", 0.6, "hyper", None), ("sigma", 0.1, "noise", None)]
    )


class CountingSource:
    def __init__(self):
        self.seen = []

    def __call__(self, x):
        self.seen.append(x)
        return math.sin(x)


class TestMemoTable:
    def test_probes_are_unique(self):
        table = MemoTable()
        table.add_probe(1.0, 2.0)
        with pytest.raises(ValueError, match="already probed"):
            table.add_probe(1.0, 3.0)

    def test_observations_may_repeat(self):
        table = MemoTable()
        table.add_probe(1.0, 2.0)
        table.add_observation(1.0, 2.5)
        table.add_observation(1.0, 2.7, label="a")
        assert len(table) == 3
        assert table.count(Origin.OBSERVED) == 2
        np.testing.assert_array_equal(table.xs, [1.0, 1.0, 1.0])

    def test_remove_label_spares_probes(self):
        table = MemoTable()
        table.add_probe(0.0, 1.0)
        table.add_observation(0.5, 1.0, label="tmp")
        table.add_observation(0.6, 1.0, label="tmp")
        table.add_observation(0.7, 1.0, label="keep")
        assert table.remove_label("tmp") == 2
        assert [e.x for e in table] == [0.0, 0.7]

    def test_ids_keep_increasing(self):
        table = MemoTable()
        table.add_observation(0.0, 0.0, label="x")
        table.remove_label("x")
        assert table.add_observation(1.0, 1.0).id == 1


class TestProber:
    def test_calls_source_once_per_input(self, params):
        source = CountingSource()
        probe, emulator = gpmem(source, KERNEL, params)
        assert probe(0.5) == pytest.approx(math.sin(0.5))
        assert probe(0.5) == pytest.approx(math.sin(0.5))
        probe(1.5)
        assert source.seen == [0.5, 1.5]
        assert probe.calls == 2
        assert len(emulator.table) == 2

    def test_prober_and_emulator_share_table(self, params):
        probe, emulator = gpmem(math.sin, KERNEL, params)
        assert probe.table is emulator.table

    def test_source_error_leaves_table_unchanged(self, params):
        def broken(x):
            raise RuntimeError("boom")

        probe, emulator = gpmem(broken, KERNEL, params)
        with pytest.raises(SourceFunctionError, match="boom") as excinfo:
            probe(2.0)
        assert excinfo.value.x == 2.0
        assert len(emulator.table) == 0

    def test_non_finite_value(self, params):
        probe, emulator = gpmem(lambda x: math.nan, KERNEL, params)
        with pytest.raises(SourceFunctionError, match="non-finite"):
            probe(1.0)
        assert len(emulator.table) == 0

    def test_any_source_exception_is_wrapped(self, params):
        probe, emulator = gpmem(lambda x: {}[x], KERNEL, params)
        with pytest.raises(SourceFunctionError, match="KeyError") as excinfo:
            probe(1.0)
        assert excinfo.value.x == 1.0
        assert isinstance(excinfo.value.__cause__, LookupError)
        assert len(emulator.table) == 0

    def test_source_function_error_passes_through(self, params):
        original = SourceFunctionError(3.0, "upstream")

        def broken(x):
            raise original

        probe, _ = gpmem(broken, KERNEL, params)
        with pytest.raises(SourceFunctionError) as excinfo:
            probe(3.0)
        assert excinfo.value is original


class TestEmulator:
    def test_empty_table_is_the_prior(self, params):
        _, emulator = gpmem(math.sin, KERNEL, params)
        post = emulator.posterior([0.0, 1.0])
        np.testing.assert_array_equal(post.mean, [0.0, 0.0])
        assert emulator.factor() is None

    def test_conditions_on_probes(self, params):
        probe, emulator = gpmem(math.sin, KERNEL, params)
        for x in np.linspace(-2, 2, 12):
            probe(x)
        post = emulator.posterior([0.3])
        assert post.mean[0] == pytest.approx(math.sin(0.3), abs=0.1)

    def test_observe_does_not_call_source(self, params):
        source = CountingSource()
        probe, emulator = gpmem(source, KERNEL, params)
        entry_id = emulator.observe(0.0, 1.0, label="hint")
        assert entry_id == 0
        assert source.seen == []
        assert emulator.table.count(Origin.OBSERVED) == 1
        assert emulator.posterior([0.0]).mean[0] > 0.5
        assert emulator.forget("hint") == 1
        assert emulator.posterior([0.0]).mean[0] == 0.0

    def test_probed_and_observed_tables_agree(self, params):
        xs = [-1.5, -0.2, 0.4, 2.2]
        xq = np.linspace(-3, 3, 9)
        probe, probed = gpmem(math.sin, KERNEL, params)
        for x in xs:
            probe.compute(x)
        _, observed = gpmem(math.sin, KERNEL, params)
        for x in xs:
            observed.observe(x, math.sin(x))
        a, b = probed.posterior(xq), observed.posterior(xq)
        np.testing.assert_allclose(a.mean, b.mean, rtol=0, atol=1e-12)
        np.testing.assert_allclose(a.cov, b.cov, rtol=0, atol=1e-12)

    def test_probe_concentrates_the_posterior(self, params):
        probe, emulator = gpmem(math.sin, KERNEL, params)
        prior_sd = math.sqrt(emulator.posterior([12.6]).cov[0, 0])
        probe.compute(12.6)
        post = emulator.posterior([12.6])
        assert math.sqrt(max(post.cov[0, 0], 0.0)) < 0.1 * prior_sd
        assert post.mean[0] == pytest.approx(math.sin(12.6), abs=0.05)

    def test_incremental_factor_matches_refactorisation(self, params, rng):
        probe, emulator = gpmem(np.cos, KERNEL, params)
        xq = np.linspace(-3, 3, 7)
        for x in rng.uniform(-3, 3, 4):
            probe(x)
        emulator.posterior(xq)
        for x in rng.uniform(-3, 3, 6):
            probe(x)
            emulator.observe(x + 0.01, float(np.cos(x)))
        cached = emulator.factor()
        fresh = jittered_cholesky(emulator.model.gram(emulator.table.xs))
        np.testing.assert_allclose(cached.L, fresh.L, rtol=1e-8, atol=1e-10)
        expected = posterior(emulator.model, emulator.table.xs, emulator.table.ys, xq)
        post = emulator.posterior(xq)
        np.testing.assert_allclose(post.mean, expected.mean, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(post.cov, expected.cov, rtol=1e-8, atol=1e-10)

    def test_set_model_drops_factor(self, params):
        probe, emulator = gpmem(math.sin, KERNEL, params)
        probe(0.0)
        probe(1.0)
        before = emulator.factor()
        emulator.set_model(params=params.with_value("l", 2.0))
        assert emulator.factor() is not before
        assert len(emulator.table) == 2
        assert emulator.params["l"] == 2.0

    def test_emulate_is_a_joint_draw(self, params):
        probe, emulator = gpmem(math.sin, KERNEL, params)
        probe(0.0)
        a = emulator.emulate([0.0, 0.5], np.random.default_rng(1))
        b = emulator.emulate([0.0, 0.5], np.random.default_rng(1))
        np.testing.assert_array_equal(a, b)
        assert isinstance(emulator.emulate_pointwise(0.2, np.random.default_rng(2)), float)

    def test_log_likelihood(self, params):
        probe, emulator = gpmem(math.sin, KERNEL, params)
        probe(0.0)
        probe(1.0)
        assert np.isfinite(emulator.log_likelihood())
