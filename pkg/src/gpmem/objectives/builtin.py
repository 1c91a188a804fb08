"""In-process source functions: the tutorial curve, Neal's test function and table look-up."""

from __future__ import annotations

import math

from gpmem.core.errors import SourceFunctionError
from gpmem.core.schemas import Dataset
from gpmem.objectives.base import BaseObjective, ObjectiveMeta
from gpmem.objectives.registry import register_objective


def demo_function(x: float) -> float:
    """exp(−0.1|x−2|)·10·cos(0.4x) + 0.2."""
    return math.exp(-0.1 * abs(x - 2.0)) * 10.0 * math.cos(0.4 * x) + 0.2


def neal_function(x: float) -> float:
    """Noise-free Neal regression curve 0.3 + 0.4x + 0.5 sin(2.7x) + 1.1/(1 + x²)."""
    return 0.3 + 0.4 * x + 0.5 * math.sin(2.7 * x) + 1.1 / (1.0 + x * x)


@register_objective
class DemoObjective(BaseObjective):
    """Damped cosine used by the optimisation tutorial."""

    meta = ObjectiveMeta(
        name="demo",
        description="exp(-0.1|x-2|) * 10 cos(0.4x) + 0.2",
        bounds=(-20.0, 20.0),
        tags=["tutorial"],
    )

    def evaluate(self, x: float) -> float:
        return demo_function(x)


@register_objective
class NealObjective(BaseObjective):
    """Neal's smooth regression curve, without the outlier noise of the generated dataset."""

    meta = ObjectiveMeta(
        name="neal",
        description="Neal's regression test function without outlier noise",
        bounds=(-2.0, 2.0),
        tags=["regression"],
    )

    def evaluate(self, x: float) -> float:
        return neal_function(x)


@register_objective
class LookupObjective(BaseObjective):
    """Return the stored y for an x present in a dataset.

    Inputs are matched exactly; an unknown x is a source failure.
    """

    meta = ObjectiveMeta(
        name="lookup",
        description="Table look-up over a loaded dataset",
        tags=["data"],
    )

    def __init__(self, dataset: Dataset | None = None) -> None:
        """Index the dataset by input; a repeated x keeps its first y."""
        super().__init__()
        self.table: dict[float, float] = {}
        for x, y in zip(dataset.xs if dataset else [], dataset.ys if dataset else [], strict=True):
            self.table.setdefault(x, y)

    def evaluate(self, x: float) -> float:
        try:
            return self.table[x]
        except KeyError:
            raise SourceFunctionError(x, "input not present in the look-up table") from None
