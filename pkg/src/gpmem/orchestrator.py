"""Runs independent seeded chains concurrently."""

from __future__ import annotations

import asyncio
import time
from collections.abc import Callable
from typing import Any, TypeVar

import numpy as np

from gpmem.core.config import settings
from gpmem.core.errors import ConfigError
from gpmem.core.logging import get_logger

log = get_logger(__name__)

ChainResult = TypeVar("ChainResult")
ChainFn = Callable[[int, np.random.Generator], ChainResult]


class RunMetrics:
    """Simple in-memory metrics for a single multi-chain run."""

    def __init__(self) -> None:
        """Reset all counters to zero."""
        self.chains_completed: int = 0
        self.failures: int = 0
        self.start_time: float = 0.0
        self.end_time: float = 0.0

    @property
    def elapsed_s(self) -> float:
        """Wall-clock seconds elapsed during the run."""
        return self.end_time - self.start_time

    def summary(self) -> dict[str, Any]:
        """Return a dict summarising completed and failed chains and elapsed time."""
        return {
            "chains_completed": self.chains_completed,
            "failures": self.failures,
            "elapsed_s": round(self.elapsed_s, 2),
        }


def chain_generators(seed: int, chains: int) -> list[np.random.Generator]:
    """One independent generator per chain, spawned from ``seed``."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(chains)]


class ChainOrchestrator:
    """Runs ``fn(chain_index, rng)`` for each chain, at most ``max_chains`` at a time.

    Results come back in chain-index order whatever the completion order, so
    anything merged from them is deterministic. If any chain raises, the
    remaining chains still run to completion and the first failure (by chain
    index) is re-raised afterwards.
    """

    def __init__(self, max_chains: int | None = None) -> None:
        """Create an orchestrator with a concurrency bound (defaults to settings)."""
        self.max_chains = max_chains if max_chains is not None else settings.max_chains
        if self.max_chains < 1:
            raise ConfigError(f"max_chains must be at least 1, got {self.max_chains}")
        self.metrics = RunMetrics()

    # ── public API ────────────────────────────────────────────────────────

    def run(self, fn: ChainFn[ChainResult], chains: int, seed: int) -> list[ChainResult]:
        """Blocking entry point."""
        return asyncio.run(self.run_async(fn, chains, seed))

    async def run_async(
        self, fn: ChainFn[ChainResult], chains: int, seed: int
    ) -> list[ChainResult]:
        """Run every chain and return results ordered by chain index."""
        if chains < 1:
            raise ConfigError(f"chains must be at least 1, got {chains}")
        self.metrics = RunMetrics()
        self.metrics.start_time = time.monotonic()
        semaphore = asyncio.Semaphore(self.max_chains)
        rngs = chain_generators(seed, chains)

        outcomes = await asyncio.gather(
            *(self._run_chain(semaphore, fn, i, rng) for i, rng in enumerate(rngs)),
            return_exceptions=True,
        )

        self.metrics.end_time = time.monotonic()
        log.info("orchestrator.run.complete", chains=chains, **self.metrics.summary())
        for outcome in outcomes:
            if isinstance(outcome, BaseException):
                raise outcome
        return list(outcomes)  # type: ignore[arg-type]

    # ── per-chain execution ───────────────────────────────────────────────

    async def _run_chain(
        self,
        semaphore: asyncio.Semaphore,
        fn: ChainFn[ChainResult],
        index: int,
        rng: np.random.Generator,
    ) -> ChainResult:
        async with semaphore:
            log.debug("orchestrator.chain.start", chain=index)
            try:
                result = await asyncio.to_thread(fn, index, rng)
            except Exception:
                self.metrics.failures += 1
                log.exception("orchestrator.chain.failed", chain=index)
                raise
            self.metrics.chains_completed += 1
            log.debug("orchestrator.chain.done", chain=index)
            return result
