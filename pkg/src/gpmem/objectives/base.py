"""Base objective interface: every source function gpmem can wrap implements this."""

from __future__ import annotations

import abc
from dataclasses import dataclass, field


@dataclass
class ObjectiveMeta:
    """Metadata describing a source function."""

    name: str
    description: str = ""
    bounds: tuple[float, float] = (-20.0, 20.0)
    tags: list[str] = field(default_factory=list)


class BaseObjective(abc.ABC):
    """Abstract scalar source function ``f: R -> R``.

    Subclasses implement ``evaluate``. Calling the instance goes through
    ``__call__``, which counts invocations so memoisation can be audited.
    """

    meta: ObjectiveMeta

    def __init__(self) -> None:
        """Start with a zero invocation count."""
        self.calls = 0

    def __call__(self, x: float) -> float:
        self.calls += 1
        return self.evaluate(float(x))

    @abc.abstractmethod
    def evaluate(self, x: float) -> float:
        """Return f(x)."""
        ...  # pragma: no cover
