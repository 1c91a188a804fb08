"""Hierarchical-hyperprior GP regression with a nested inference schedule."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from gpmem.core.config import settings
from gpmem.core.logging import get_logger
from gpmem.core.schemas import Dataset, GridRow, ThetaRecord
from gpmem.gp.model import predictive_bands, sample_joint
from gpmem.inference.mh import ChainStats, safe_log_density
from gpmem.inference.priors import ContinuousPrior, Gamma
from gpmem.inference.schedule import Repeat, Schedule, nested_schedule, parse_schedule
from gpmem.inference.state import GPTarget, ModelState
from gpmem.kernels.params import HyperParams
from gpmem.kernels.text import parse_kernel
from gpmem.storage.results import ResultStore
from gpmem.workflows.common import data_grid, memoize_dataset

log = get_logger(__name__)

HYPERHYPER_SCOPE = "hyperhyper"
HYPER_SCOPE = "hyper"

REGRESS_KERNEL = "SE(sf, l) + WN(sigma)"

_HYPERPRIOR = Gamma(5.0, 1.0)


def default_regress_schedule(repeats: int | None = None) -> str:
    """``repeat(N, do(mh(hyperhyper, 2), mh(hyper, 1)))``."""
    n = settings.regress_repeats if repeats is None else repeats
    return f"repeat({n}, do(mh({HYPERHYPER_SCOPE}, 2), mh({HYPER_SCOPE}, 1)))"


def hierarchical_params(rng: np.random.Generator) -> HyperParams:
    """Draw the regression model's θ from its priors.

    α and β of the signal scale, the length-scale and the noise scale are
    Gamma(5, 1) in scope ``hyperhyper``; ``sf``, ``l`` and ``sigma`` are
    Gamma(α, β) in scope ``hyper``.
    """
    rows: list[tuple[str, str, ContinuousPrior]] = [
        ("alpha_sf", HYPERHYPER_SCOPE, _HYPERPRIOR),
        ("beta_sf", HYPERHYPER_SCOPE, _HYPERPRIOR),
        ("alpha_l", HYPERHYPER_SCOPE, _HYPERPRIOR),
        ("beta_l", HYPERHYPER_SCOPE, _HYPERPRIOR),
        ("alpha_sigma", HYPERHYPER_SCOPE, _HYPERPRIOR),
        ("beta_sigma", HYPERHYPER_SCOPE, _HYPERPRIOR),
        ("sf", HYPER_SCOPE, Gamma("alpha_sf", "beta_sf")),
        ("l", HYPER_SCOPE, Gamma("alpha_l", "beta_l")),
        ("sigma", HYPER_SCOPE, Gamma("alpha_sigma", "beta_sigma")),
    ]
    values: dict[str, float] = {}
    for name, _scope, prior in rows:
        # parents precede children in ``rows``
        values[name] = max(prior.sample(rng, values), np.finfo(float).tiny)
    return HyperParams.build((name, values[name], scope, prior) for name, scope, prior in rows)


@dataclass
class RegressResult:
    """Everything a regression run produces."""

    kernel: str
    samples: list[ThetaRecord]
    grid: pd.DataFrame
    paths: pd.DataFrame
    initial_theta: dict[str, float]
    final_theta: dict[str, float]
    initial_log_target: float
    final_log_target: float
    stats: ChainStats = field(default_factory=ChainStats)

    def summary(self) -> dict[str, object]:
        """JSON-ready digest of the run."""
        return {
            "kernel": self.kernel,
            "initial_theta": self.initial_theta,
            "final_theta": self.final_theta,
            "initial_log_target": self.initial_log_target,
            "final_log_target": self.final_log_target,
            "samples": len(self.samples),
            "chain": self.stats.summary(),
        }


def run_regress(
    dataset: Dataset,
    rng: np.random.Generator,
    *,
    kernel: str | None = None,
    params: HyperParams | None = None,
    schedule: Schedule | str | None = None,
    grid_size: int | None = None,
    n_paths: int | None = None,
) -> RegressResult:
    """Fit θ to ``dataset`` under the hierarchical model and summarise the posterior.

    One :class:`ThetaRecord` is kept per outer repetition. A schedule that
    is not a ``repeat`` yields a single record for its final state.

    Raises:
        ConfigError: the kernel names a parameter the table lacks, or the
            schedule names a scope with nothing to move.
    """
    kernel_text = kernel or REGRESS_KERNEL
    expr = parse_kernel(kernel_text)
    params = params if params is not None else hierarchical_params(rng)
    if schedule is None or isinstance(schedule, str):
        sched = parse_schedule(schedule or default_regress_schedule())
    else:
        sched = schedule

    prober, emulator = memoize_dataset(dataset, expr, params)
    target = GPTarget(prober.table.xs, prober.table.ys, expr)
    state = ModelState(params)
    initial_log_target, _ = safe_log_density(target, state)
    stats = ChainStats()
    samples: list[ThetaRecord] = []

    def record(index: int, current: ModelState, log_target: float) -> None:
        samples.append(
            ThetaRecord(
                repetition=index,
                log_target=log_target,
                log_likelihood=target.log_likelihood(current),
                theta=current.params.snapshot(),
            )
        )
        log.debug("regress.repetition", repetition=index, log_target=round(log_target, 4))

    final = nested_schedule(sched, state, target, rng, stats=stats, on_repeat=record)
    final_log_target, _ = safe_log_density(target, final)
    if not isinstance(sched, Repeat):
        record(0, final, final_log_target)

    emulator.set_model(params=final.params)
    xq = data_grid(prober.table.xs, grid_size or settings.grid_size)
    post = emulator.posterior(xq)
    lo, hi = predictive_bands(post)
    grid = pd.DataFrame(
        [
            GridRow(x=x, mean=m, lo=a, hi=b).model_dump()
            for x, m, a, b in zip(xq, post.mean, lo, hi, strict=True)
        ]
    )
    k = settings.emulator_paths if n_paths is None else n_paths
    paths = pd.DataFrame({"x": xq})
    for i in range(k):
        paths[f"path_{i}"] = sample_joint(post, rng)

    log.info(
        "regress.complete",
        kernel=kernel_text,
        repetitions=len(samples),
        initial_log_target=round(initial_log_target, 4),
        final_log_target=round(final_log_target, 4),
    )
    return RegressResult(
        kernel=kernel_text,
        samples=samples,
        grid=grid,
        paths=paths,
        initial_theta=params.snapshot(),
        final_theta=final.params.snapshot(),
        initial_log_target=initial_log_target,
        final_log_target=final_log_target,
        stats=stats,
    )


def write_regress(result: RegressResult, store: ResultStore) -> list[Path]:
    """Write the θ sample log, the band grid, the emulator paths and a summary."""
    return [
        store.write_records("theta_samples.jsonl", result.samples),
        store.write_csv("grid.csv", result.grid),
        store.write_csv("emulator_paths.csv", result.paths),
        store.write_json("regress.json", result.summary()),
    ]
