"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations

from collections.abc import Sequence


class GpmemError(Exception):
    """Base class for every error raised by gpmem."""

    exit_code: int = 1


class ConfigError(GpmemError, KeyError):
    """Bad configuration: unknown names, scopes, schedules or unparsable text."""

    exit_code = 2

    def __str__(self) -> str:
        # KeyError quotes its argument; keep messages readable.
        return str(self.args[0]) if self.args else ""


class ParseError(ConfigError):
    """Text that does not parse; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, text: str, position: int) -> None:
        """Record the offending text and where parsing stopped."""
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class DataError(GpmemError, ValueError):
    """Input data is malformed, empty or non-finite."""

    exit_code = 3


class NumericError(GpmemError, ArithmeticError):
    """A numerical routine failed (factorisation, non-finite value or gradient)."""

    exit_code = 4


class NotPositiveDefiniteError(NumericError):
    """Cholesky factorisation failed at every jitter level tried."""

    def __init__(self, message: str, jitters: Sequence[float] = ()) -> None:
        """Keep the attempted absolute jitter levels for diagnostics."""
        if jitters:
            message = f"{message} (jitter tried: {', '.join(f'{j:.1e}' for j in jitters)})"
        super().__init__(message)
        self.jitters = tuple(jitters)


class SourceFunctionError(GpmemError, RuntimeError):
    """A wrapped source function failed or returned a non-finite value at ``x``."""

    exit_code = 4

    def __init__(self, x: float, reason: str) -> None:
        """Attach the offending input to the failure."""
        super().__init__(f"source function failed at x={x!r}: {reason}")
        self.x = x
        self.reason = reason
