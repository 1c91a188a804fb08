"""External-process objective: one subprocess call per probe, with retries."""

from __future__ import annotations

import shlex
import subprocess

from tenacity import Retrying, retry_if_exception_type, stop_after_attempt, wait_exponential

from gpmem.core.config import settings
from gpmem.core.errors import SourceFunctionError
from gpmem.core.logging import get_logger
from gpmem.objectives.base import BaseObjective, ObjectiveMeta
from gpmem.objectives.registry import register_objective

log = get_logger(__name__)

_TRANSIENT = (subprocess.CalledProcessError, subprocess.TimeoutExpired)


@register_objective
class CommandObjective(BaseObjective):
    """Run ``program`` with x on stdin and read a decimal literal from stdout.

    Non-zero exits and timeouts are retried with exponential backoff; the last
    failure, or unparsable output, surfaces as :class:`SourceFunctionError`.
    """

    meta = ObjectiveMeta(
        name="cmd",
        description="External program: x on stdin, f(x) on stdout",
        tags=["external"],
    )

    def __init__(
        self,
        program: str,
        timeout_s: float | None = None,
        max_retries: int | None = None,
        backoff_base: float | None = None,
    ) -> None:
        """Split the command line and fix the retry policy."""
        super().__init__()
        self.argv = shlex.split(program)
        self.timeout_s = timeout_s if timeout_s is not None else settings.objective_timeout_s
        attempts = max_retries if max_retries is not None else settings.objective_max_retries
        base = backoff_base if backoff_base is not None else settings.objective_retry_backoff_base
        self._retrying = Retrying(
            stop=stop_after_attempt(attempts),
            wait=wait_exponential(multiplier=base, min=0, max=30),
            retry=retry_if_exception_type(_TRANSIENT),
            before_sleep=self._log_retry,
            reraise=True,
        )

    def _log_retry(self, state: object) -> None:
        log.warning(
            "objective.cmd.retry",
            program=self.argv[0] if self.argv else "",
            attempt=getattr(state, "attempt_number", None),
        )

    def _run_once(self, x: float) -> str:
        log.debug("objective.cmd.invoke", program=self.argv[0], x=x)
        done = subprocess.run(  # noqa: S603
            self.argv,
            input=f"{x!r}\n",
            capture_output=True,
            text=True,
            timeout=self.timeout_s,
            check=True,
        )
        return done.stdout

    def evaluate(self, x: float) -> float:
        try:
            out = self._retrying(self._run_once, x)
        except subprocess.CalledProcessError as exc:
            raise SourceFunctionError(x, f"exit status {exc.returncode}") from exc
        except subprocess.TimeoutExpired as exc:
            raise SourceFunctionError(x, f"timed out after {self.timeout_s}s") from exc
        except OSError as exc:
            raise SourceFunctionError(x, f"could not start program: {exc}") from exc
        text = out.strip()
        try:
            return float(text)
        except ValueError:
            raise SourceFunctionError(x, f"expected a decimal literal, got {text!r}") from None
