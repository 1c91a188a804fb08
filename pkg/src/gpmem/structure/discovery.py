"""Structure discovery: run grammar + hyperparameter MH and tabulate the structures visited."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from gpmem.core.config import settings
from gpmem.core.errors import DataError, NumericError
from gpmem.core.logging import get_logger
from gpmem.core.schemas import SampleRecord
from gpmem.inference.mh import ChainStats, safe_log_density
from gpmem.inference.schedule import Schedule, nested_schedule, parse_schedule
from gpmem.inference.state import GPTarget, ModelState
from gpmem.kernels.algebra import StructExpr, parse_struct, struct_of
from gpmem.kernels.params import HyperParams
from gpmem.memo.table import MemoTable
from gpmem.structure.grammar import (
    GRAMMAR_SCOPE,
    HYPER_SCOPE,
    BaseKernelSet,
    ProposalMode,
    grammar_handler,
    sample_grammar,
)

log = get_logger(__name__)

_MAX_INIT_DRAWS = 100


def default_schedule(repeats: int | None = None) -> str:
    """``repeat(N, do(mh(grammar, 1), mh(hyper-parameters, 2)))``."""
    n = settings.discovery_repeats if repeats is None else repeats
    return f"repeat({n}, do(mh({GRAMMAR_SCOPE}, 1), mh({HYPER_SCOPE}, 2)))"


@dataclass
class PosteriorSampleSet:
    """Recorded structure-posterior samples, in chain then repetition order."""

    records: list[SampleRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def structures(self) -> list[StructExpr]:
        """Parsed structure of every record, read from the records as they are now."""
        return [parse_struct(r.structure) for r in self.records]

    def require_samples(self) -> None:
        """Raise DataError when there is nothing to query."""
        if not self.records:
            raise DataError("posterior sample set is empty")

    @classmethod
    def merge(cls, sets: Iterable[PosteriorSampleSet]) -> PosteriorSampleSet:
        """Concatenate several chains' samples, ordered by chain index (stable)."""
        records = [r for s in sets for r in s.records]
        records.sort(key=lambda r: r.chain)
        return cls(records)

    def marginals(self) -> pd.DataFrame:
        """Posterior mass per structure, most probable first."""
        self.require_samples()
        frame = pd.DataFrame(
            {
                "structure": [str(s) for s in self.structures],
                "log_likelihood": [r.log_likelihood for r in self.records],
            }
        )
        table = (
            frame.groupby("structure", sort=True)
            .agg(count=("log_likelihood", "size"), mean_log_likelihood=("log_likelihood", "mean"))
            .reset_index()
        )
        table["probability"] = table["count"] / len(self.records)
        table = table.sort_values(
            ["probability", "structure"], ascending=[False, True], kind="mergesort"
        )
        return table[["structure", "probability", "mean_log_likelihood", "count"]].reset_index(
            drop=True
        )

    def peak(self) -> tuple[StructExpr, SampleRecord]:
        """Modal structure and its highest-likelihood sample."""
        top = self.marginals().iloc[0]["structure"]
        best = max(
            (r for r, s in zip(self.records, self.structures, strict=True) if str(s) == top),
            key=lambda r: r.log_likelihood,
        )
        return parse_struct(top), best


def _initial_state(
    bk: BaseKernelSet, params: HyperParams, target: GPTarget, rng: np.random.Generator
) -> ModelState:
    for _ in range(_MAX_INIT_DRAWS):
        grammar, _ = sample_grammar(bk, rng)
        state = ModelState(params, grammar)
        value, _numeric = safe_log_density(target, state)
        if value > -np.inf:
            return state
    raise NumericError(f"no initial structure with finite density in {_MAX_INIT_DRAWS} draws")


def run_structure_discovery(
    table: MemoTable,
    rng: np.random.Generator,
    *,
    bk: BaseKernelSet | None = None,
    params: HyperParams | None = None,
    schedule: Schedule | str | None = None,
    burn_in_fraction: float | None = None,
    chain: int = 0,
    mode: ProposalMode | str = ProposalMode.SINGLE_SITE,
    stats: ChainStats | None = None,
) -> PosteriorSampleSet:
    """Sample kernel structures for the data in ``table``.

    One sample is recorded per outer repetition of the schedule, after its
    inner steps; the first ``burn_in_fraction`` of repetitions is dropped.

    Raises:
        DataError: the memo table is empty.
    """
    if len(table) == 0:
        raise DataError("structure discovery needs a non-empty memo table")
    if bk is None or params is None:
        default_bk, default_params = BaseKernelSet.default()
        bk = bk or default_bk
        params = params or default_params
    if schedule is None or isinstance(schedule, str):
        sched = parse_schedule(schedule or default_schedule())
    else:
        sched = schedule
    fraction = settings.burn_in_fraction if burn_in_fraction is None else burn_in_fraction
    repeats = getattr(sched, "count", 1)
    burn = int(fraction * repeats)

    target = GPTarget(table.xs, table.ys)
    state = _initial_state(bk, params, target, rng)
    samples = PosteriorSampleSet()

    def record(index: int, current: ModelState, _log_target: float) -> None:
        if index < burn:
            return
        kernel = current.grammar.kernel()
        samples.records.append(
            SampleRecord(
                chain=chain,
                repetition=index,
                structure=str(struct_of(kernel, current.params)),
                kernel=str(kernel),
                log_likelihood=target.log_likelihood(current),
                theta=current.params.snapshot(),
            )
        )

    stats = stats if stats is not None else ChainStats()
    nested_schedule(
        sched,
        state,
        target,
        rng,
        stats=stats,
        handlers={GRAMMAR_SCOPE: grammar_handler(mode)},
        on_repeat=record,
    )
    log.info(
        "discovery.complete",
        chain=chain,
        samples=len(samples),
        burn_in=burn,
        grammar_acceptance=round(stats.acceptance_rate(GRAMMAR_SCOPE), 3),
    )
    return samples


def sample_set_from_records(records: Sequence[SampleRecord]) -> PosteriorSampleSet:
    """Rebuild a sample set from stored records."""
    return PosteriorSampleSet(list(records))
