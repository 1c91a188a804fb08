"""The statistical memoizer: a source function becomes a prober and a GP emulator.

Both halves share one :class:`MemoTable`. Probing appends the source's value;
observing appends a pair without calling the source. The emulator always
conditions on the whole table as it stands at call time.
"""

from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np
from numpy.typing import ArrayLike

from gpmem.core.errors import SourceFunctionError
from gpmem.core.logging import get_logger
from gpmem.gp.linalg import CholeskyFactor
from gpmem.gp.model import GPModel, PosteriorGaussian, log_likelihood, posterior, sample_joint
from gpmem.kernels.evaluate import gram_matrix
from gpmem.kernels.expr import KernelExpr
from gpmem.kernels.params import HyperParams
from gpmem.memo.table import MemoEntry, MemoTable

log = get_logger(__name__)

SourceFunction = Callable[[float], float]


class Emulator:
    """Online GP emulator over a memo table.

    A Cholesky factor of the table's gram matrix is cached and extended by one
    row per new entry. Removing entries or changing the model drops the cache;
    the next query refactorises from scratch.
    """

    def __init__(self, table: MemoTable, model: GPModel) -> None:
        """Bind to a table and a model; nothing is factorised yet."""
        self.table = table
        self.model = model
        self._factor: CholeskyFactor | None = None

    # ── model ────────────────────────────────────────────────────────────

    @property
    def kernel(self) -> KernelExpr:
        """Current kernel expression."""
        return self.model.kernel

    @property
    def params(self) -> HyperParams:
        """Current hyperparameters."""
        return self.model.params

    def set_model(
        self, kernel: KernelExpr | None = None, params: HyperParams | None = None
    ) -> None:
        """Swap kernel and/or θ. The memo table is untouched."""
        self.model = GPModel(
            kernel if kernel is not None else self.model.kernel,
            params if params is not None else self.model.params,
        )
        self._factor = None

    # ── factor bookkeeping ───────────────────────────────────────────────

    def on_append(self, entry: MemoEntry) -> None:
        """Extend the cached factor by the newest table entry, or drop it."""
        factor = self._factor
        if factor is None or factor.n != len(self.table) - 1:
            self._factor = None
            return
        xs = self.table.xs
        k_new = gram_matrix(self.model.kernel, self.model.params, xs[:-1], [entry.x])[:, 0]
        k_self = float(gram_matrix(self.model.kernel, self.model.params, [entry.x])[0, 0])
        extended = factor.append(k_new, k_self)
        if extended is None:
            log.debug("gpmem.append_fallback", n=factor.n, x=entry.x)
        self._factor = extended

    def factor(self) -> CholeskyFactor | None:
        """Cholesky factor of the current table, or ``None`` for an empty table."""
        if len(self.table) == 0:
            return None
        if self._factor is None or self._factor.n != len(self.table):
            self._factor = self.model.factor(self.table.xs)
        return self._factor

    # ── data ─────────────────────────────────────────────────────────────

    def observe(self, x: float, y: float, label: str | None = None) -> int:
        """Condition on (x, y) without calling the source; returns the entry id."""
        entry = self.table.add_observation(x, y, label)
        self.on_append(entry)
        log.debug("gpmem.observe", x=entry.x, y=entry.y, label=label)
        return entry.id

    def forget(self, label: str) -> int:
        """Drop every observation carrying ``label``; returns the count removed."""
        removed = self.table.remove_label(label)
        if removed:
            self._factor = None
        log.debug("gpmem.forget", label=label, removed=removed)
        return removed

    # ── queries ──────────────────────────────────────────────────────────

    def posterior(self, xq: ArrayLike) -> PosteriorGaussian:
        """Joint posterior at ``xq`` given the whole memo table."""
        return posterior(self.model, self.table.xs, self.table.ys, xq, factor=self.factor())

    def emulate(self, xq: ArrayLike, rng: np.random.Generator) -> np.ndarray:
        """One fresh joint draw at ``xq``; with an empty table this is a prior draw."""
        return sample_joint(self.posterior(xq), rng)

    def emulate_pointwise(self, x: float, rng: np.random.Generator) -> float:
        """Single-input shortcut for :meth:`emulate`."""
        return float(self.emulate([x], rng)[0])

    def log_likelihood(self) -> float:
        """log P(table ys | table xs, θ)."""
        return log_likelihood(self.model, self.table.xs, self.table.ys)

    def __call__(self, xq: ArrayLike, rng: np.random.Generator) -> np.ndarray:
        return self.emulate(xq, rng)


class Prober:
    """Memoising wrapper around a source function (``f_compute``)."""

    def __init__(self, f: SourceFunction, table: MemoTable, emulator: Emulator) -> None:
        """Share ``table`` with ``emulator``."""
        self.f = f
        self.table = table
        self.emulator = emulator
        self.calls = 0

    def compute(self, x: float) -> float:
        """f(x), invoking the source at most once per distinct x.

        Raises:
            SourceFunctionError: the source raised or returned a non-finite
                value; the memo table is left unchanged.
        """
        x = float(x)
        hit = self.table.probed(x)
        if hit is not None:
            return hit.y
        self.calls += 1
        try:
            y = float(self.f(x))
        except SourceFunctionError:
            raise
        except Exception as exc:
            raise SourceFunctionError(x, f"{type(exc).__name__}: {exc}") from exc
        if not math.isfinite(y):
            raise SourceFunctionError(x, f"non-finite value {y!r}")
        entry = self.table.add_probe(x, y)
        self.emulator.on_append(entry)
        log.debug("gpmem.probe", x=x, y=y, table_size=len(self.table))
        return y

    def __call__(self, x: float) -> float:
        return self.compute(x)


def gpmem(
    f: SourceFunction, kernel: KernelExpr, params: HyperParams
) -> tuple[Prober, Emulator]:
    """Wrap ``f`` into a linked (prober, emulator) pair over a fresh memo table."""
    model = GPModel(kernel, params)
    table = MemoTable()
    emulator = Emulator(table, model)
    return Prober(f, table, emulator), emulator
