"""Tests for the multi-chain orchestrator."""

import threading
import time

import numpy as np
import pytest

from gpmem.core.errors import ConfigError, DataError
from gpmem.orchestrator import ChainOrchestrator, chain_generators


class TestChainGenerators:
    def test_reproducible_and_independent(self):
        first = [g.random() for g in chain_generators(11, 3)]
        again = [g.random() for g in chain_generators(11, 3)]
        assert first == again
        assert len(set(first)) == 3


class TestChainOrchestrator:
    def test_results_in_chain_order(self):
        def chain(index, rng):
            time.sleep(0.01 * (3 - index))
            return index, rng.random()

        results = ChainOrchestrator(max_chains=4).run(chain, chains=4, seed=5)
        assert [i for i, _ in results] == [0, 1, 2, 3]
        expected = [g.random() for g in chain_generators(5, 4)]
        assert [v for _, v in results] == expected

    def test_concurrency_bound(self):
        lock = threading.Lock()
        running = [0]
        peak = [0]

        def chain(index, rng):
            with lock:
                running[0] += 1
                peak[0] = max(peak[0], running[0])
            time.sleep(0.02)
            with lock:
                running[0] -= 1
            return index

        ChainOrchestrator(max_chains=2).run(chain, chains=6, seed=0)
        assert peak[0] <= 2

    def test_failure_after_all_chains(self):
        done = []

        def chain(index, rng):
            if index == 1:
                raise DataError("chain 1 failed")
            done.append(index)
            return index

        orchestrator = ChainOrchestrator(max_chains=1)
        with pytest.raises(DataError, match="chain 1 failed"):
            orchestrator.run(chain, chains=3, seed=0)
        assert sorted(done) == [0, 2]
        assert orchestrator.metrics.failures == 1
        assert orchestrator.metrics.chains_completed == 2

    def test_metrics_summary(self):
        orchestrator = ChainOrchestrator(max_chains=2)
        orchestrator.run(lambda i, rng: i, chains=2, seed=0)
        summary = orchestrator.metrics.summary()
        assert summary["chains_completed"] == 2
        assert summary["failures"] == 0
        assert summary["elapsed_s"] >= 0

    @pytest.mark.parametrize("max_chains", [0, -1])
    def test_rejects_bad_bound(self, max_chains):
        with pytest.raises(ConfigError, match="max_chains"):
            ChainOrchestrator(max_chains=max_chains)

    def test_rejects_no_chains(self):
        with pytest.raises(ConfigError, match="chains must be at least 1"):
            ChainOrchestrator().run(lambda i, rng: i, chains=0, seed=0)

    def test_generator_type(self):
        results = ChainOrchestrator().run(lambda i, rng: rng, chains=1, seed=0)
        assert isinstance(results[0], np.random.Generator)
