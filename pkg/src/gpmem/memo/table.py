"""The memo table shared by a prober and its emulator."""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from gpmem.core.schemas import Origin


@dataclass(frozen=True)
class MemoEntry:
    """One (x, y) pair and how it was obtained."""

    id: int
    x: float
    y: float
    origin: Origin
    label: str | None = None


class MemoTable:
    """Ordered, append-mostly list of memo entries.

    Probed inputs are unique; observations may repeat any x, probed or not.
    Only labelled observations are ever removed.
    """

    def __init__(self) -> None:
        """Start empty."""
        self._entries: list[MemoEntry] = []
        self._probed: dict[float, MemoEntry] = {}
        self._next_id = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[MemoEntry]:
        return iter(self._entries)

    def _append(self, x: float, y: float, origin: Origin, label: str | None) -> MemoEntry:
        entry = MemoEntry(self._next_id, float(x), float(y), origin, label)
        self._next_id += 1
        self._entries.append(entry)
        return entry

    def probed(self, x: float) -> MemoEntry | None:
        """The probed entry for exactly ``x``, if any."""
        return self._probed.get(float(x))

    def add_probe(self, x: float, y: float) -> MemoEntry:
        """Record a source-function result; ``x`` must not be probed already."""
        if float(x) in self._probed:
            raise ValueError(f"x={x!r} is already probed")
        entry = self._append(x, y, Origin.PROBED, None)
        self._probed[entry.x] = entry
        return entry

    def add_observation(self, x: float, y: float, label: str | None = None) -> MemoEntry:
        """Record an externally supplied pair."""
        return self._append(x, y, Origin.OBSERVED, label)

    def remove_label(self, label: str) -> int:
        """Drop observed entries carrying ``label``; returns how many went."""
        kept = [
            e for e in self._entries if not (e.origin is Origin.OBSERVED and e.label == label)
        ]
        removed = len(self._entries) - len(kept)
        self._entries = kept
        return removed

    @property
    def xs(self) -> np.ndarray:
        """Inputs in table order."""
        return np.fromiter((e.x for e in self._entries), dtype=float, count=len(self._entries))

    @property
    def ys(self) -> np.ndarray:
        """Outputs in table order."""
        return np.fromiter((e.y for e in self._entries), dtype=float, count=len(self._entries))

    def count(self, origin: Origin) -> int:
        """Number of entries with the given origin."""
        return sum(1 for e in self._entries if e.origin is origin)
