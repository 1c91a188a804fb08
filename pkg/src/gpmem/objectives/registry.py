"""Objective registry: look up source functions by name."""

from __future__ import annotations

from typing import Any

from gpmem.core.errors import ConfigError
from gpmem.objectives.base import BaseObjective

# Populated by each objective module at import time via ``register_objective``.
OBJECTIVE_REGISTRY: dict[str, type[BaseObjective]] = {}

_CMD_PREFIX = "cmd:"


def register_objective(cls: type[BaseObjective]) -> type[BaseObjective]:
    """Class decorator that registers an objective in the global registry."""
    OBJECTIVE_REGISTRY[cls.meta.name] = cls
    return cls


def _load_builtins() -> None:
    from gpmem.objectives import builtin, command  # noqa: F401


def get_objective(name: str) -> type[BaseObjective]:
    """Look up a registered objective by name. Raises ConfigError if not found."""
    _load_builtins()
    if name not in OBJECTIVE_REGISTRY:
        available = ", ".join(sorted(OBJECTIVE_REGISTRY)) or "(none)"
        raise ConfigError(f"Unknown objective '{name}'. Available: {available}")
    return OBJECTIVE_REGISTRY[name]


def resolve_objective(spec: str, **kwargs: Any) -> BaseObjective:
    """Instantiate from the CLI form: ``demo``, ``neal`` or ``cmd:<program>``."""
    if spec.startswith(_CMD_PREFIX):
        program = spec[len(_CMD_PREFIX) :].strip()
        if not program:
            raise ConfigError("'cmd:' objective needs a program to run")
        return get_objective("cmd")(program, **kwargs)  # type: ignore[call-arg]
    return get_objective(spec)(**kwargs)


def available_objectives() -> dict[str, type[BaseObjective]]:
    """Every registered objective, built-ins included, sorted by name."""
    _load_builtins()
    return dict(sorted(OBJECTIVE_REGISTRY.items()))
