"""Structure discovery over a dataset, optionally with several concurrent chains."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from gpmem.core.errors import ConfigError
from gpmem.core.logging import get_logger
from gpmem.core.schemas import Dataset, MarginalRow
from gpmem.inference.mh import ChainStats
from gpmem.inference.schedule import Schedule, parse_schedule
from gpmem.kernels.algebra import describe
from gpmem.kernels.params import HyperParams
from gpmem.orchestrator import ChainOrchestrator
from gpmem.storage.results import ResultStore
from gpmem.structure.discovery import (
    PosteriorSampleSet,
    default_schedule,
    run_structure_discovery,
)
from gpmem.structure.grammar import BaseKernelSet, ProposalMode
from gpmem.workflows.common import memoize_dataset

log = get_logger(__name__)


def base_kernel_set(kinds: str | None = None) -> tuple[BaseKernelSet, HyperParams]:
    """Default base kernels and θ, optionally restricted to a comma list such as ``LIN,WN``."""
    bk, params = BaseKernelSet.default()
    if kinds:
        try:
            bk = bk.restricted([k.strip().upper() for k in kinds.split(",") if k.strip()])
        except ValueError as exc:
            raise ConfigError(f"bad base kernel list {kinds!r}: {exc}") from None
    return bk, params


@dataclass
class DiscoverResult:
    """Merged samples of every chain."""

    samples: PosteriorSampleSet
    stats: list[ChainStats] = field(default_factory=list)

    def peak_report(self) -> dict[str, Any]:
        """Modal structure, its plain-English components and a θ snapshot."""
        struct, best = self.samples.peak()
        probability = float(self.samples.marginals().iloc[0]["probability"])
        return {
            "structure": str(struct),
            "probability": probability,
            "components": describe(struct),
            "kernel": best.kernel,
            "log_likelihood": best.log_likelihood,
            "theta": best.theta,
            "chain": best.chain,
            "repetition": best.repetition,
        }


def run_discover(
    dataset: Dataset,
    seed: int,
    *,
    chains: int = 1,
    schedule: Schedule | str | None = None,
    kinds: str | None = None,
    mode: ProposalMode | str = ProposalMode.SINGLE_SITE,
    burn_in_fraction: float | None = None,
    max_chains: int | None = None,
) -> DiscoverResult:
    """Run ``chains`` independent discovery chains and merge their samples by chain index."""
    bk, params = base_kernel_set(kinds)
    if schedule is None or isinstance(schedule, str):
        sched = parse_schedule(schedule or default_schedule())
    else:
        sched = schedule
    prober, _emulator = memoize_dataset(dataset, bk.fallback, params)
    table = prober.table
    stats = [ChainStats() for _ in range(chains)]

    def chain(index: int, rng: np.random.Generator) -> PosteriorSampleSet:
        return run_structure_discovery(
            table,
            rng,
            bk=bk,
            params=params,
            schedule=sched,
            burn_in_fraction=burn_in_fraction,
            chain=index,
            mode=mode,
            stats=stats[index],
        )

    orchestrator = ChainOrchestrator(max_chains)
    merged = PosteriorSampleSet.merge(orchestrator.run(chain, chains, seed))
    log.info(
        "discover.complete", chains=chains, samples=len(merged), **orchestrator.metrics.summary()
    )
    return DiscoverResult(merged, stats)


def write_discover(result: DiscoverResult, store: ResultStore) -> list[Path]:
    """Write the marginal table, the peak report and the sample log."""
    frame = result.samples.marginals()
    rows = [
        MarginalRow(
            structure=str(r.structure),
            probability=float(r.probability),
            mean_log_likelihood=float(r.mean_log_likelihood),
            count=int(r.count),
        )
        for r in frame.itertuples(index=False)
    ]
    return [
        store.write_csv("marginals.csv", frame),
        store.write_json("peak.json", {**result.peak_report(), "marginals": rows}),
        store.write_records("samples.jsonl", result.samples.records),
    ]
