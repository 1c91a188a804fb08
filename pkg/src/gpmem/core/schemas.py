"""Pydantic models for every record that crosses a file boundary."""

from __future__ import annotations

import hashlib
import json
import math
from gpmem._compat import StrEnum
from typing import Any

from pydantic import BaseModel, Field, model_validator

SCHEMA_VERSION = "1"


class Origin(StrEnum):
    """How a memo-table entry got there."""

    PROBED = "probed"
    OBSERVED = "observed"


class SearchMode(StrEnum):
    """Action-search strategy for Thompson sampling."""

    UNIFORM = "uniform"
    DRIFT = "drift"
    TAU_SEARCH = "tau-search"


class Dataset(BaseModel):
    """Paired scalar inputs and outputs, in file order."""

    xs: list[float]
    ys: list[float]
    source: str = Field(default="", description="Path or generator id")

    @model_validator(mode="after")
    def check_shape(self) -> Dataset:
        """Reject empty, ragged or non-finite data."""
        if len(self.xs) != len(self.ys):
            raise ValueError(f"xs has {len(self.xs)} values but ys has {len(self.ys)}")
        if not self.xs:
            raise ValueError("dataset is empty")
        if not all(math.isfinite(v) for v in (*self.xs, *self.ys)):
            raise ValueError("dataset contains non-finite values")
        return self

    def __len__(self) -> int:
        return len(self.xs)


class RunConfig(BaseModel):
    """Everything needed to replay a command bit-for-bit."""

    workflow: str
    seed: int = Field(default=0, ge=0)
    options: dict[str, Any] = Field(default_factory=dict)
    config_hash: str = Field(default="", description="SHA-256 of workflow, seed and options")

    @model_validator(mode="after")
    def compute_config_hash(self) -> RunConfig:
        """Derive a deterministic hash of the run configuration if not already set."""
        if not self.config_hash:
            payload = json.dumps(
                {"workflow": self.workflow, "seed": self.seed, "options": self.options},
                sort_keys=True,
                default=str,
            ).encode()
            self.config_hash = hashlib.sha256(payload).hexdigest()
        return self


class OutputHeader(BaseModel):
    """Embedded at the top of every output file."""

    schema_version: str = SCHEMA_VERSION
    run_config: RunConfig


class SampleRecord(BaseModel):
    """One recorded state of a structure-discovery chain."""

    chain: int = 0
    repetition: int
    structure: str
    kernel: str
    log_likelihood: float
    theta: dict[str, float] = Field(default_factory=dict)


class TraceRecord(BaseModel):
    """One Thompson-sampling iteration."""

    iteration: int
    action: float
    reward: float
    sigma: float
    length_scale: float
    best_action: float
    best_reward: float
    grid_argmax: float


class ThetaRecord(BaseModel):
    """Hyperparameter state after one outer repetition of a regression schedule."""

    repetition: int
    log_target: float
    log_likelihood: float
    theta: dict[str, float]


class GridRow(BaseModel):
    """Predictive mean and ±2 sd band at one grid input."""

    x: float
    mean: float
    lo: float
    hi: float


class MarginalRow(BaseModel):
    """Posterior mass of one structure."""

    structure: str
    probability: float = Field(ge=0.0, le=1.0)
    mean_log_likelihood: float
    count: int = Field(ge=1)
