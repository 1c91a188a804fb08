"""Boolean structure queries against a stored sample log."""

from __future__ import annotations

from pathlib import Path
from typing import Any

from gpmem.core.logging import get_logger
from gpmem.core.schemas import SampleRecord
from gpmem.storage.results import ResultStore
from gpmem.structure.discovery import PosteriorSampleSet, sample_set_from_records
from gpmem.structure.query import parse_query, query_breakdown

log = get_logger(__name__)


def load_samples(path: str | Path) -> PosteriorSampleSet:
    """Read a ``samples.jsonl`` log written by the discover workflow."""
    _header, records = ResultStore.read_records(path, SampleRecord)
    return sample_set_from_records(records)


def run_query(samples_path: str | Path, text: str) -> dict[str, Any]:
    """Probability of ``text`` and of each atomic term, with the query echoed back."""
    query = parse_query(text)
    samples = load_samples(samples_path)
    breakdown = query_breakdown(query, samples)
    probability = breakdown.pop("query")
    log.info("query.complete", query=str(query), probability=probability, samples=len(samples))
    return {
        "query": str(query),
        "probability": probability,
        "terms": breakdown,
        "samples": len(samples),
    }
