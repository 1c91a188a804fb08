"""Tests for the external-process objective."""

import shlex
import sys

import pytest

from gpmem.core.errors import SourceFunctionError
from gpmem.objectives.command import CommandObjective


def _program(tmp_path, body):
    script = tmp_path / "objective.py"
    script.write_text("import sys\n" + body)
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(script))}"


def _objective(program, **kwargs):
    return CommandObjective(program, max_retries=kwargs.pop("max_retries", 2), backoff_base=1.0,
                            **kwargs)


class TestCommandObjective:
    def test_reads_stdout(self, tmp_path):
        program = _program(tmp_path, "x = float(sys.stdin.read())\nprint(2 * x + 1)\n")
        objective = _objective(program)
        assert objective(1.5) == 4.0
        assert objective.calls == 1

    def test_input_is_exact(self, tmp_path):
        program = _program(tmp_path, "print(sys.stdin.read().strip())\n")
        assert _objective(program)(0.1) == 0.1

    def test_nonzero_exit(self, tmp_path):
        program = _program(tmp_path, "sys.exit(3)\n")
        with pytest.raises(SourceFunctionError, match="exit status 3"):
            _objective(program, max_retries=1)(0.0)

    def test_retries_transient_failure(self, tmp_path):
        marker = tmp_path / "seen"
        program = _program(
            tmp_path,
            "import pathlib\n"
            f"p = pathlib.Path({str(marker)!r})\n"
            "if not p.exists():\n"
            "    p.write_text('1')\n"
            "    sys.exit(1)\n"
            "print(7)\n",
        )
        assert _objective(program)(0.0) == 7.0

    def test_timeout(self, tmp_path):
        program = _program(tmp_path, "import time\ntime.sleep(5)\n")
        with pytest.raises(SourceFunctionError, match="timed out"):
            _objective(program, max_retries=1, timeout_s=0.2)(0.0)

    def test_missing_program(self, tmp_path):
        with pytest.raises(SourceFunctionError, match="could not start program"):
            _objective(str(tmp_path / "does-not-exist"))(0.0)

    def test_unparsable_output(self, tmp_path):
        program = _program(tmp_path, "print('hello')\n")
        with pytest.raises(SourceFunctionError, match="expected a decimal literal"):
            _objective(program)(0.0)
