"""Helpers shared by the workflows."""

from __future__ import annotations

import numpy as np

from gpmem.core.schemas import Dataset
from gpmem.kernels.expr import KernelExpr
from gpmem.kernels.params import HyperParams
from gpmem.memo.gpmem import Emulator, Prober, gpmem
from gpmem.objectives.builtin import LookupObjective


def memoize_dataset(
    dataset: Dataset, kernel: KernelExpr, params: HyperParams
) -> tuple[Prober, Emulator]:
    """Load a dataset into a fresh memo table through a look-up source.

    The first occurrence of each input is probed; repeats of an input are
    added as observations so that every row conditions the emulator.
    """
    prober, emulator = gpmem(LookupObjective(dataset), kernel, params)
    for x, y in zip(dataset.xs, dataset.ys, strict=True):
        if prober.table.probed(x) is None:
            prober.compute(x)
        else:
            emulator.observe(x, y)
    return prober, emulator


def data_grid(xs: np.ndarray, size: int) -> np.ndarray:
    """``size`` evenly spaced points spanning the data range (widened by 1 if degenerate)."""
    lo, hi = float(np.min(xs)), float(np.max(xs))
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    return np.linspace(lo, hi, size)
