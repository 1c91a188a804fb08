"""CLI entry point for the ``gpmem`` command."""

from __future__ import annotations

import functools
import json
from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar

import click
import numpy as np
from pydantic import ValidationError

from gpmem.core.config import settings
from gpmem.core.errors import ConfigError, GpmemError
from gpmem.core.logging import bind_run, get_logger, setup_logging
from gpmem.core.schemas import Dataset, RunConfig, SearchMode
from gpmem.storage.results import ResultStore

log = get_logger(__name__)

F = TypeVar("F", bound=Callable[..., Any])


def _exits_with_error_code(fn: F) -> F:
    """Turn library errors into a message on stderr and the error's exit status."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            err: GpmemError = ConfigError(f"invalid options: {exc.errors()[0]['msg']}")
        except GpmemError as exc:
            err = exc
        log.error("cli.failed", command=fn.__name__, error=str(err), kind=type(err).__name__)
        click.echo(f"error: {err}", err=True)
        raise click.exceptions.Exit(err.exit_code)

    return wrapper  # type: ignore[return-value]


def _echo(payload: dict[str, Any]) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _load_or_generate(data: Path | None, kind: str, n: int, seed: int) -> Dataset:
    from gpmem.data.datasets import gen_linper, gen_neal, load_csv

    if data is not None:
        return load_csv(data)
    return gen_neal(n, seed) if kind == "neal" else gen_linper(n, seed)


def _out_dir(out: Path | None) -> Path:
    return out if out is not None else settings.output_dir


seed_option = click.option("--seed", default=0, show_default=True, type=click.IntRange(min=0))
out_option = click.option(
    "--out", type=click.Path(file_okay=False, path_type=Path), default=None,
    help="Output directory (default: GPMEM_OUTPUT_DIR)",
)
data_option = click.option(
    "--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
    help="Two-column x,y CSV (default: a generated dataset)",
)


@click.group()
@click.option("--log-level", default=None, help="Override log level (DEBUG, INFO, WARNING, ERROR)")
def main(log_level: str | None) -> None:
    """Gaussian-process memoization: regression, structure discovery and optimisation."""
    if log_level:
        import gpmem.core.config as cfg
        cfg.settings.log_level = log_level
    setup_logging()


@main.command()
@data_option
@seed_option
@out_option
@click.option("--steps", default=None, type=click.IntRange(min=0), help="Outer repetitions")
@click.option("--schedule", default=None, help='e.g. "repeat(100, do(mh(hyperhyper, 2)))"')
@click.option("--kernel", default=None, help='Kernel text, e.g. "SE(sf, l) + WN(sigma)"')
@click.option("--paths", "n_paths", default=None, type=click.IntRange(min=0))
@_exits_with_error_code
def regress(
    data: Path | None,
    seed: int,
    out: Path | None,
    steps: int | None,
    schedule: str | None,
    kernel: str | None,
    n_paths: int | None,
) -> None:
    """Fit the hierarchical SE + WN model and emit θ samples, bands and emulator paths."""
    from gpmem.workflows.regress import default_regress_schedule, run_regress, write_regress

    bind_run(workflow="regress", seed=seed)
    schedule_text = schedule or default_regress_schedule(steps)
    dataset = _load_or_generate(data, "neal", 100, seed)
    run_config = RunConfig(
        workflow="regress",
        seed=seed,
        options={
            "data": dataset.source,
            "schedule": schedule_text,
            "kernel": kernel,
            "paths": n_paths,
        },
    )
    result = run_regress(
        dataset,
        np.random.default_rng(seed),
        kernel=kernel,
        schedule=schedule_text,
        n_paths=n_paths,
    )
    written = write_regress(result, ResultStore(_out_dir(out), run_config))
    _echo({**result.summary(), "files": [str(p) for p in written]})


@main.command()
@data_option
@seed_option
@out_option
@click.option("--steps", default=None, type=click.IntRange(min=1), help="Outer repetitions")
@click.option("--schedule", default=None, help="Full schedule text (overrides --steps)")
@click.option("--kernel", default=None, help="Comma list of base kernels, e.g. LIN,PER,SE,WN")
@click.option("--chains", default=1, show_default=True, type=click.IntRange(min=1))
@click.option(
    "--proposal",
    type=click.Choice(["single-site", "independent"]),
    default="single-site",
    show_default=True,
)
@_exits_with_error_code
def discover(
    data: Path | None,
    seed: int,
    out: Path | None,
    steps: int | None,
    schedule: str | None,
    kernel: str | None,
    chains: int,
    proposal: str,
) -> None:
    """Sample kernel structures and emit the marginal table, peak report and sample log."""
    from gpmem.structure.discovery import default_schedule
    from gpmem.workflows.discover import run_discover, write_discover

    bind_run(workflow="discover", seed=seed, chains=chains)
    schedule_text = schedule or default_schedule(steps)
    dataset = _load_or_generate(data, "linper", 60, seed)
    run_config = RunConfig(
        workflow="discover",
        seed=seed,
        options={
            "data": dataset.source,
            "schedule": schedule_text,
            "kernel": kernel,
            "chains": chains,
            "proposal": proposal,
        },
    )
    result = run_discover(
        dataset, seed, chains=chains, schedule=schedule_text, kinds=kernel, mode=proposal
    )
    written = write_discover(result, ResultStore(_out_dir(out), run_config))
    peak = result.peak_report()
    _echo(
        {
            "peak": peak["structure"],
            "probability": peak["probability"],
            "components": peak["components"],
            "files": [str(p) for p in written],
        }
    )


@main.command()
@click.argument("samples", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("text")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
@_exits_with_error_code
def query(samples: Path, text: str, out: Path | None) -> None:
    """Probability of a Boolean structure query, e.g. ``"WN OR LIN*WN"``."""
    from gpmem.workflows.query import run_query

    result = run_query(samples, text)
    if out is not None:
        run_config = RunConfig(workflow="query", options={"samples": str(samples), "query": text})
        ResultStore(out, run_config).write_json("query.json", result)
    _echo(result)


@main.command()
@seed_option
@out_option
@click.option("--objective", default="demo", show_default=True, help="demo | neal | cmd:<program>")
@click.option(
    "--mode",
    type=click.Choice([m.value for m in SearchMode]),
    default=SearchMode.UNIFORM.value,
    show_default=True,
)
@click.option("--iterations", default=None, type=click.IntRange(min=0))
@click.option("--temperature", default=None, type=float)
@click.option("--navg", default=None, type=click.IntRange(min=1))
@click.option("--drift-width", default=None, type=float)
@click.option("--lo", default=None, type=float)
@click.option("--hi", default=None, type=float)
@_exits_with_error_code
def optimize(
    seed: int,
    out: Path | None,
    objective: str,
    mode: str,
    iterations: int | None,
    temperature: float | None,
    navg: int | None,
    drift_width: float | None,
    lo: float | None,
    hi: float | None,
) -> None:
    """Thompson-sampling optimisation; emits the trace and best-so-far curve."""
    from gpmem.bayesopt.thompson import BayesOptConfig
    from gpmem.workflows.optimize import run_optimize

    bind_run(workflow="optimize", seed=seed, objective=objective)
    overrides = {
        "iterations": iterations,
        "temperature": temperature,
        "n_avg": navg,
        "drift_width": drift_width,
        "lo": lo,
        "hi": hi,
    }
    config = BayesOptConfig(
        mode=SearchMode(mode), **{k: v for k, v in overrides.items() if v is not None}
    )
    run_config = RunConfig(
        workflow="optimize",
        seed=seed,
        options={"objective": objective, **config.model_dump(mode="json")},
    )
    store = ResultStore(_out_dir(out), run_config)
    trace, written = run_optimize(objective, config, np.random.default_rng(seed), store)
    _echo(
        {
            "iterations": len(trace),
            "best_action": trace[-1].best_action if trace else None,
            "best_reward": trace[-1].best_reward if trace else None,
            "files": [str(p) for p in written],
        }
    )


@main.command("gen-data")
@click.option("--kind", type=click.Choice(["neal", "linper"]), default="neal", show_default=True)
@click.option("--n", "n", default=100, show_default=True, type=click.IntRange(min=1))
@seed_option
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@_exits_with_error_code
def gen_data(kind: str, n: int, seed: int, out: Path) -> None:
    """Write a synthetic x,y dataset."""
    from gpmem.data.datasets import save_csv

    dataset = _load_or_generate(None, kind, n, seed)
    path = save_csv(dataset, out)
    _echo({"kind": kind, "n": n, "seed": seed, "file": str(path)})


@main.command()
def list_objectives() -> None:
    """List all registered objectives."""
    from gpmem.objectives.registry import available_objectives

    for name, cls in available_objectives().items():
        click.echo(f"  {name:12s} {cls.meta.description}")


if __name__ == "__main__":
    main()
