"""Thompson-sampling optimisation of a named objective, streaming its trace to disk."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from gpmem.bayesopt.thompson import BayesOptConfig, thompson_run
from gpmem.core.logging import get_logger
from gpmem.core.schemas import TraceRecord
from gpmem.objectives.registry import resolve_objective
from gpmem.storage.results import ResultStore

log = get_logger(__name__)

TRACE_RECORDS = "trace.jsonl"
TRACE_CSV = "trace.csv"


def trace_frame(trace: list[TraceRecord]) -> pd.DataFrame:
    """One row per iteration, columns in record order, for best-so-far plots."""
    columns = list(TraceRecord.model_fields)
    return pd.DataFrame([r.model_dump() for r in trace], columns=columns)


def run_optimize(
    objective: str,
    config: BayesOptConfig,
    rng: np.random.Generator,
    store: ResultStore,
) -> tuple[list[TraceRecord], list[Path]]:
    """Optimise ``objective`` and write its trace.

    Trace lines are flushed as iterations finish, so a run cut short by a
    failing external command still leaves every completed iteration on disk.
    """
    source = resolve_objective(objective)
    if objective.startswith("cmd:"):
        config = config.model_copy(update={"stop_on_failure": True})
    with store.open_records(TRACE_RECORDS) as writer:
        trace = thompson_run(source, config, rng, on_iteration=writer.write)
    paths = [store.out_dir / TRACE_RECORDS, store.write_csv(TRACE_CSV, trace_frame(trace))]
    summary: dict[str, Any] = {
        "objective": objective,
        "iterations": len(trace),
        "probes": source.calls,
        "best_action": trace[-1].best_action if trace else None,
        "best_reward": trace[-1].best_reward if trace else None,
    }
    paths.append(store.write_json("optimize.json", summary))
    log.info("optimize.complete", **summary)
    return trace, paths
