"""Datasets: two-column CSV I/O and the synthetic generators used in tests and demos."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import pandas as pd

from gpmem.core.errors import DataError
from gpmem.core.logging import get_logger
from gpmem.core.schemas import Dataset
from gpmem.gp.model import GPModel, posterior, sample_joint
from gpmem.kernels.params import HyperParams
from gpmem.kernels.text import parse_kernel
from gpmem.objectives.builtin import neal_function

log = get_logger(__name__)

NEAL_OUTLIER_RATE = 0.05
NEAL_NOISE_SD = 0.1
NEAL_OUTLIER_SD = 1.0

LINPER_KERNEL = "LIN(lin_sf) + PER(per_sf,per_p,per_l) + WN(wn_sf)"
LINPER_THETA = {"lin_sf": 0.3, "per_sf": 1.5, "per_p": 2.0, "per_l": 1.0, "wn_sf": 0.2}


def _numeric(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def load_csv(path: str | Path) -> Dataset:
    """Read ``x,y`` rows in file order; a non-numeric first row is taken as a header.

    Raises:
        DataError: unreadable file, wrong column count, non-numeric or
            non-finite cell, or no data rows. Line numbers are 1-based.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    try:
        frame = pd.read_csv(
            io.StringIO(text), header=None, dtype=str, skip_blank_lines=False, keep_default_na=False
        )
    except pd.errors.EmptyDataError:
        raise DataError(f"{path} contains no rows") from None
    except pd.errors.ParserError as exc:
        raise DataError(f"{path}: malformed CSV ({exc})") from None

    xs: list[float] = []
    ys: list[float] = []
    for line, row in enumerate(frame.itertuples(index=False), start=1):
        cells = [c.strip() if isinstance(c, str) else "" for c in row]
        if not any(cells):
            continue
        if len(cells) != 2 or not all(cells):
            raise DataError(f"{path}:{line}: expected two values, got {','.join(cells)!r}")
        x, y = _numeric(cells[0]), _numeric(cells[1])
        if x is None or y is None:
            if line == 1 and x is None and y is None:
                continue
            raise DataError(f"{path}:{line}: non-numeric value in {','.join(cells)!r}")
        if not (np.isfinite(x) and np.isfinite(y)):
            raise DataError(f"{path}:{line}: non-finite value in {','.join(cells)!r}")
        xs.append(x)
        ys.append(y)
    if not xs:
        raise DataError(f"{path} contains no data rows")
    log.debug("data.loaded", path=str(path), rows=len(xs))
    return Dataset(xs=xs, ys=ys, source=str(path))


def save_csv(dataset: Dataset, path: str | Path) -> Path:
    """Write ``x,y`` with a header; values keep full precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({"x": dataset.xs, "y": dataset.ys}).to_csv(
        path, index=False, float_format="%.17g", lineterminator="\n"
    )
    return path


def gen_neal(n: int, seed: int) -> Dataset:
    """Neal's regression set: x ~ U[−2, 2], y = f(x) + η, η sd 0.1 (95%) or 1.0 (5%)."""
    if n < 1:
        raise DataError(f"need at least one point, got n={n}")
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-2.0, 2.0, size=n)
    outlier = rng.random(n) < NEAL_OUTLIER_RATE
    sd = np.where(outlier, NEAL_OUTLIER_SD, NEAL_NOISE_SD)
    ys = np.array([neal_function(x) for x in xs]) + sd * rng.standard_normal(n)
    return Dataset(xs=xs.tolist(), ys=ys.tolist(), source=f"neal(n={n},seed={seed})")


def gen_linper(n: int, seed: int) -> Dataset:
    """One draw from a LIN + PER + WN GP at ``n`` evenly spaced inputs on [0, 10]."""
    if n < 1:
        raise DataError(f"need at least one point, got n={n}")
    rng = np.random.default_rng(seed)
    xs = np.linspace(0.0, 10.0, n)
    params = HyperParams(LINPER_THETA, {name: "truth" for name in LINPER_THETA})
    prior = posterior(GPModel(parse_kernel(LINPER_KERNEL), params), [], [], xs)
    ys = sample_joint(prior, rng)
    return Dataset(xs=xs.tolist(), ys=ys.tolist(), source=f"linper(n={n},seed={seed})")
