"""Composite inference schedules: ``repeat(N, do(step, ...))``.

Text form::

    repeat(100, do(mh(hyperhyper, 2), mh(hyper, 1)))
    repeat(10, do(drift(hyper, 5, 0.5), gradient(hyper, 3, 0.01)))

Scope names may be quoted (``"hyper-parameters"``) and may contain hyphens.
"""

from __future__ import annotations

import re
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass

import numpy as np

from gpmem.core.config import settings
from gpmem.core.errors import ConfigError, ParseError
from gpmem.core.logging import get_logger
from gpmem.inference.gradient import gradient_ascent
from gpmem.inference.mh import ChainStats, mh, mh_drift, safe_log_density, scope_members
from gpmem.inference.state import InferenceTarget, ModelState

log = get_logger(__name__)


@dataclass(frozen=True)
class MHStep:
    scope: str
    steps: int


@dataclass(frozen=True)
class DriftStep:
    scope: str
    steps: int
    width: float


@dataclass(frozen=True)
class GradientStep:
    scope: str
    steps: int
    step_size: float


@dataclass(frozen=True)
class Do:
    """Run the body steps in order once."""

    body: tuple[Step, ...]


@dataclass(frozen=True)
class Repeat:
    """Run ``body`` ``count`` times."""

    count: int
    body: Do


Step = MHStep | DriftStep | GradientStep | Do | Repeat
Schedule = Step

# Custom handlers for special scopes (e.g. kernel-structure moves): called as
# handler(step, state, target, rng, stats) -> state.
ScopeHandler = Callable[
    [MHStep, ModelState, InferenceTarget, np.random.Generator, ChainStats], ModelState
]
RepeatCallback = Callable[[int, ModelState, float], None]


def leaf_steps(schedule: Schedule) -> Iterator[MHStep | DriftStep | GradientStep]:
    """Every transition step, depth first."""
    if isinstance(schedule, Repeat):
        yield from leaf_steps(schedule.body)
    elif isinstance(schedule, Do):
        for step in schedule.body:
            yield from leaf_steps(step)
    else:
        yield schedule


def scopes_of(schedule: Schedule) -> set[str]:
    """Scope tags a schedule touches."""
    return {step.scope for step in leaf_steps(schedule)}


# ── parsing ─────────────────────────────────────────────────────────────

_TOKEN = re.compile(
    r"\s*(?:(?P<str>\"[^\"]*\"|'[^']*')|(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_\-]*)|(?P<punct>[(),=]))"
)


class _ScheduleParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while text[pos:].strip():
            match = _TOKEN.match(text, pos)
            if match is None:
                raise ParseError("unexpected character in schedule", text, pos)
            kind = match.lastgroup
            assert kind is not None
            self.tokens.append((kind, match.group(kind), match.start(kind)))
            pos = match.end()
        self.i = 0

    def _pos(self) -> int:
        return self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)

    def _next(self, kind: str | None = None, value: str | None = None) -> str:
        if self.i >= len(self.tokens):
            raise ParseError("unexpected end of schedule", self.text, len(self.text))
        k, v, p = self.tokens[self.i]
        if (kind is not None and k != kind) or (value is not None and v != value):
            raise ParseError(f"expected {value or kind}, got '{v}'", self.text, p)
        self.i += 1
        return v

    def _peek(self) -> str | None:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else None

    def parse(self) -> Schedule:
        step = self.step()
        if self.i < len(self.tokens):
            raise ParseError("trailing input after schedule", self.text, self._pos())
        return step

    def _args(self) -> list[tuple[str, str, int]]:
        self._next("punct", "(")
        args: list[tuple[str, str, int]] = []
        while True:
            pos = self._pos()
            kind, value, _ = self.tokens[self.i] if self.i < len(self.tokens) else ("", "", pos)
            # keyword form: name=value
            nxt = self.tokens[self.i + 1][1] if self.i + 1 < len(self.tokens) else None
            if kind == "name" and nxt == "=":
                self.i += 2
                pos = self._pos()
                kind, value, _ = self.tokens[self.i] if self.i < len(self.tokens) else ("", "", pos)
            if kind in ("str", "num", "name"):
                self.i += 1
                args.append((kind, value.strip("\"'") if kind == "str" else value, pos))
            else:
                raise ParseError("expected an argument", self.text, pos)
            if self._peek() == ",":
                self.i += 1
                continue
            self._next("punct", ")")
            return args

    def _int(self, arg: tuple[str, str, int]) -> int:
        kind, value, pos = arg
        if kind != "num" or not re.fullmatch(r"\+?\d+", value):
            raise ParseError("expected a non-negative integer", self.text, pos)
        return int(value)

    def _float(self, arg: tuple[str, str, int]) -> float:
        kind, value, pos = arg
        if kind != "num":
            raise ParseError("expected a number", self.text, pos)
        return float(value)

    def _scope(self, arg: tuple[str, str, int]) -> str:
        kind, value, pos = arg
        if kind == "num":
            raise ParseError("expected a scope name", self.text, pos)
        return value

    def step(self) -> Step:
        pos = self._pos()
        head = self._next("name")
        if head in ("repeat", "do"):
            if head == "do":
                return self._do_body()
            self._next("punct", "(")
            count_pos = self._pos()
            count = self._int(("num", self._next("num"), count_pos))
            self._next("punct", ",")
            body = self.step()
            self._next("punct", ")")
            return Repeat(count, body if isinstance(body, Do) else Do((body,)))
        args = self._args()
        if head == "mh" and len(args) == 2:
            return MHStep(self._scope(args[0]), self._int(args[1]))
        if head == "drift" and len(args) == 3:
            return DriftStep(self._scope(args[0]), self._int(args[1]), self._float(args[2]))
        if head in ("gradient", "gradient_ascent", "gradient-ascent") and len(args) in (2, 3):
            size = self._float(args[2]) if len(args) == 3 else settings.gradient_step_size
            return GradientStep(self._scope(args[0]), self._int(args[1]), size)
        raise ParseError(
            f"unknown schedule step '{head}' with {len(args)} argument(s)", self.text, pos
        )

    def _do_body(self) -> Do:
        self._next("punct", "(")
        body = [self.step()]
        while self._peek() == ",":
            self.i += 1
            body.append(self.step())
        self._next("punct", ")")
        return Do(tuple(body))


def parse_schedule(text: str) -> Schedule:
    """Parse the schedule text form into an immutable tree."""
    return _ScheduleParser(text).parse()


# ── execution ───────────────────────────────────────────────────────────


def validate_schedule(
    schedule: Schedule, state: ModelState, handlers: Mapping[str, ScopeHandler] | None = None
) -> None:
    """Raise ConfigError for any scope the state cannot serve, before anything runs."""
    handlers = handlers or {}
    for step in leaf_steps(schedule):
        if step.scope in handlers and isinstance(step, MHStep):
            continue
        if step.scope in handlers:
            raise ConfigError(f"scope '{step.scope}' only supports mh steps")
        scope_members(state, step.scope, need_prior=isinstance(step, MHStep))


def _run(
    schedule: Schedule,
    state: ModelState,
    target: InferenceTarget,
    rng: np.random.Generator,
    stats: ChainStats,
    handlers: Mapping[str, ScopeHandler],
    on_repeat: RepeatCallback | None,
) -> ModelState:
    if isinstance(schedule, Repeat):
        for index in range(schedule.count):
            state = _run(schedule.body, state, target, rng, stats, handlers, None)
            if on_repeat is not None:
                on_repeat(index, state, safe_log_density(target, state)[0])
        return state
    if isinstance(schedule, Do):
        for step in schedule.body:
            state = _run(step, state, target, rng, stats, handlers, None)
        return state
    if isinstance(schedule, MHStep):
        handler = handlers.get(schedule.scope)
        if handler is not None:
            return handler(schedule, state, target, rng, stats)
        return mh(schedule.scope, schedule.steps, state, target, rng, stats)
    if isinstance(schedule, DriftStep):
        return mh_drift(schedule.scope, schedule.steps, schedule.width, state, target, rng, stats)
    return gradient_ascent(
        schedule.scope,
        schedule.steps,
        schedule.step_size,
        state,
        target,
        stats,  # type: ignore[arg-type]
    )


def nested_schedule(
    schedule: Schedule | str,
    state: ModelState,
    target: InferenceTarget,
    rng: np.random.Generator,
    *,
    stats: ChainStats | None = None,
    handlers: Mapping[str, ScopeHandler] | None = None,
    on_repeat: RepeatCallback | None = None,
) -> ModelState:
    """Execute a schedule; ``on_repeat(index, state, log_target)`` follows each outer repetition.

    Raises:
        ConfigError: a step names a scope with nothing to move.
    """
    if isinstance(schedule, str):
        schedule = parse_schedule(schedule)
    handlers = handlers or {}
    validate_schedule(schedule, state, handlers)
    stats = stats if stats is not None else ChainStats()
    state = _run(schedule, state, target, rng, stats, handlers, on_repeat)
    log.debug("schedule.complete", **{f"{k}_proposals": v for k, v in stats.proposals.items()})
    return state
