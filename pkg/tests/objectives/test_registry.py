"""Tests for the objective registry and built-in source functions."""

import math

import pytest

from gpmem.core.errors import ConfigError, SourceFunctionError
from gpmem.core.schemas import Dataset
from gpmem.objectives.builtin import (
    DemoObjective,
    LookupObjective,
    NealObjective,
    demo_function,
    neal_function,
)
from gpmem.objectives.command import CommandObjective
from gpmem.objectives.registry import available_objectives, get_objective, resolve_objective


class TestRegistry:
    def test_builtins_registered(self):
        assert set(available_objectives()) >= {"demo", "neal", "lookup", "cmd"}

    def test_sorted(self):
        names = list(available_objectives())
        assert names == sorted(names)

    def test_every_objective_is_documented(self):
        undocumented = [name for name, cls in available_objectives().items() if not cls.__doc__]
        assert undocumented == []

    def test_get(self):
        assert get_objective("neal") is NealObjective

    def test_unknown(self):
        with pytest.raises(ConfigError, match="Unknown objective 'nope'"):
            get_objective("nope")

    def test_resolve_plain(self):
        assert isinstance(resolve_objective("demo"), DemoObjective)

    def test_resolve_command(self):
        objective = resolve_objective("cmd: ./score --fast", timeout_s=1.0)
        assert isinstance(objective, CommandObjective)
        assert objective.argv == ["./score", "--fast"]
        assert objective.timeout_s == 1.0

    def test_resolve_command_needs_program(self):
        with pytest.raises(ConfigError, match="needs a program"):
            resolve_objective("cmd:  ")


class TestBuiltins:
    def test_demo_values(self):
        assert demo_function(2.0) == pytest.approx(10.0 * math.cos(0.8) + 0.2)
        assert demo_function(-8.0) == pytest.approx(math.exp(-1.0) * 10.0 * math.cos(-3.2) + 0.2)

    def test_neal_at_zero(self):
        assert neal_function(0.0) == pytest.approx(1.4)

    def test_calls_are_counted(self):
        objective = NealObjective()
        objective(0.0)
        objective(1)
        assert objective.calls == 2

    def test_lookup(self):
        objective = LookupObjective(Dataset(xs=[1.0, 2.0, 1.0], ys=[10.0, 20.0, 30.0]))
        assert objective(1.0) == 10.0
        assert objective(2.0) == 20.0

    def test_lookup_miss(self):
        objective = LookupObjective(Dataset(xs=[1.0], ys=[10.0]))
        with pytest.raises(SourceFunctionError, match="not present"):
            objective(1.5)
