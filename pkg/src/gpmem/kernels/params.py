"""Hyperparameter tables: named positive values, scope tags and priors."""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType

from gpmem.core.errors import ConfigError
from gpmem.inference.priors import ContinuousPrior


@dataclass(frozen=True, eq=False)
class HyperParams(Mapping[str, float]):
    """Immutable table θ of named hyperparameters.

    Every name carries exactly one scope tag. A prior of ``None`` marks a
    fixed (or derived) value that inference never proposes. Updates return
    new tables, so a table can be shared freely between emulators and chains.
    """

    values: Mapping[str, float] = field()  # explicit: Python 3.10 would take Mapping.values as a default
    scopes: Mapping[str, str]
    priors: Mapping[str, ContinuousPrior | None] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Freeze the mappings and check the table invariants."""
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))
        object.__setattr__(self, "scopes", MappingProxyType(dict(self.scopes)))
        priors = {name: self.priors.get(name) for name in self.values}
        object.__setattr__(self, "priors", MappingProxyType(priors))
        missing = set(self.values) ^ set(self.scopes)
        if missing:
            raise ConfigError(f"every hyperparameter needs exactly one scope: {sorted(missing)}")
        for name, value in self.values.items():
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"hyperparameter '{name}' must be positive, got {value!r}")
        for name, prior in priors.items():
            for parent in prior.parents if prior is not None else ():
                if parent not in self.values:
                    raise ConfigError(f"prior of '{name}' refers to unknown '{parent}'")

    # ── construction ─────────────────────────────────────────────────────

    @classmethod
    def build(
        cls, entries: Iterable[tuple[str, float, str, ContinuousPrior | None]]
    ) -> HyperParams:
        """Build from ``(name, value, scope, prior)`` rows."""
        rows = list(entries)
        return cls(
            values={n: v for n, v, _, _ in rows},
            scopes={n: s for n, _, s, _ in rows},
            priors={n: p for n, _, _, p in rows},
        )

    def with_values(self, updates: Mapping[str, float]) -> HyperParams:
        """Return a copy with some values replaced."""
        unknown = set(updates) - set(self.values)
        if unknown:
            raise ConfigError(f"unknown hyperparameters: {sorted(unknown)}")
        return HyperParams({**self.values, **updates}, self.scopes, self.priors)

    def with_value(self, name: str, value: float) -> HyperParams:
        """Return a copy with one value replaced."""
        return self.with_values({name: value})

    def merged(self, other: HyperParams) -> HyperParams:
        """Union of two tables; ``other`` wins on name clashes."""
        return HyperParams(
            {**self.values, **other.values},
            {**self.scopes, **other.scopes},
            {**self.priors, **other.priors},
        )

    # ── queries ──────────────────────────────────────────────────────────

    def __getitem__(self, name: str) -> float:
        try:
            return self.values[name]
        except KeyError:
            raise ConfigError(f"unresolved kernel parameter '{name}'") from None

    def __iter__(self) -> Iterator[str]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def scope_members(self, scope: str) -> list[str]:
        """Names tagged with ``scope``, in table order."""
        return [n for n, s in self.scopes.items() if s == scope]

    @property
    def scope_tags(self) -> set[str]:
        """All scope tags in use."""
        return set(self.scopes.values())

    def children_of(self, name: str) -> list[str]:
        """Hyperparameters whose prior depends on ``name``."""
        return [n for n, p in self.priors.items() if p is not None and name in p.parents]

    def log_prior(self) -> float:
        """Sum of log prior densities over every non-fixed hyperparameter."""
        total = 0.0
        for name, prior in self.priors.items():
            if prior is not None:
                total += prior.logpdf(self.values[name], self.values)
        return total

    def snapshot(self) -> dict[str, float]:
        """Plain dict copy of the values."""
        return dict(self.values)
