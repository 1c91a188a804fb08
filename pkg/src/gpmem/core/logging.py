"""Structured logging: rich console for interactive runs, JSON for batch jobs.

Log lines go to stderr so stdout stays free for machine-readable command output.
"""

from __future__ import annotations

import logging
import sys
from typing import Any

import structlog
from rich.console import Console
from rich.theme import Theme

from gpmem.core.config import settings

_THEME = Theme(
    {
        "log.level.debug": "dim cyan",
        "log.level.info": "bold green",
        "log.level.warning": "bold yellow",
        "log.level.error": "bold red",
        "log.event": "bold white",
        "log.key": "dim",
        "log.value": "magenta",
    }
)

console = Console(stderr=True, theme=_THEME)


def _console_renderer() -> structlog.types.Processor:
    kv = structlog.dev.KeyValueColumnFormatter
    return structlog.dev.ConsoleRenderer(
        columns=[
            structlog.dev.Column(
                "timestamp",
                kv(
                    key_style=None,
                    value_style="dim",
                    reset_style="dim",
                    value_repr=str,
                    prefix="",
                    postfix=" ",
                ),
            ),
            structlog.dev.Column(
                "level",
                structlog.dev.LogLevelColumnFormatter(
                    level_styles=structlog.dev.ConsoleRenderer.get_default_level_styles(),
                    reset_style=structlog.dev.RESET_ALL,
                ),
            ),
            structlog.dev.Column(
                "event",
                kv(
                    key_style=None,
                    value_style="bold",
                    reset_style="",
                    value_repr=str,
                    prefix="",
                    postfix=" ",
                ),
            ),
            structlog.dev.Column(
                "",
                kv(
                    key_style="dim",
                    value_style="magenta",
                    reset_style="",
                    value_repr=repr,
                    prefix="",
                    postfix="",
                ),
            ),
        ],
        exception_formatter=structlog.dev.rich_traceback,
    )


def setup_logging() -> None:
    """Configure structlog for the library and the CLI."""
    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if settings.log_json
        else _console_renderer()
    )

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.TimeStamper(fmt="iso"),
            *([structlog.processors.format_exc_info] if settings.log_json else []),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, settings.log_level.upper(), logging.INFO)
        ),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=True,
    )


def bind_run(**context: Any) -> None:
    """Attach run-wide context (workflow, seed, chain) to every subsequent log line."""
    structlog.contextvars.bind_contextvars(**context)


def clear_run() -> None:
    """Drop run-wide logging context."""
    structlog.contextvars.clear_contextvars()


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """Return a named structlog logger."""
    return structlog.get_logger(name)  # type: ignore[return-value]
