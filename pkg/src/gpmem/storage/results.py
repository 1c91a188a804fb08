"""Result files: JSON documents, commented CSV tables and JSON-lines record logs.

Every file carries an :class:`OutputHeader` (schema version and the exact
RunConfig). Output bytes depend only on the RunConfig and the results.
"""

from __future__ import annotations

import io
import json
import math
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Any, TypeVar

import pandas as pd
from pydantic import BaseModel, ValidationError

from gpmem.core.errors import DataError
from gpmem.core.logging import get_logger
from gpmem.core.schemas import OutputHeader, RunConfig

log = get_logger(__name__)

RecordT = TypeVar("RecordT", bound=BaseModel)

_CSV_FLOAT = "%.10g"


def _dumps(payload: Any, indent: int | None = None) -> str:
    return json.dumps(payload, sort_keys=True, indent=indent, allow_nan=False)


def _plain(payload: Any) -> Any:
    if isinstance(payload, BaseModel):
        return _plain(payload.model_dump(mode="json"))
    if isinstance(payload, float) and not math.isfinite(payload):
        return None
    if isinstance(payload, dict):
        return {str(k): _plain(v) for k, v in payload.items()}
    if isinstance(payload, list | tuple):
        return [_plain(v) for v in payload]
    return payload


class RecordWriter:
    """Append records to an open JSON-lines file, flushing each line."""

    def __init__(self, handle: IO[str]) -> None:
        """Wrap an open text handle positioned after the header line."""
        self._handle = handle
        self.count = 0

    def write(self, record: BaseModel) -> None:
        """Serialise one record."""
        self._handle.write(_dumps(_plain(record)) + "\n")
        self._handle.flush()
        self.count += 1


class ResultStore:
    """Writes a run's outputs under ``out_dir``."""

    def __init__(self, out_dir: str | Path, run_config: RunConfig) -> None:
        """Bind an output directory to the run configuration it records."""
        self.out_dir = Path(out_dir)
        self.run_config = run_config

    @property
    def header(self) -> OutputHeader:
        """Header embedded in every file."""
        return OutputHeader(run_config=self.run_config)

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    # ── writers ──────────────────────────────────────────────────────────

    def write_json(self, name: str, payload: BaseModel | dict[str, Any]) -> Path:
        """``{"header": ..., "result": payload}``, keys sorted, two-space indent."""
        path = self._path(name)
        doc = {"header": _plain(self.header), "result": _plain(payload)}
        path.write_text(_dumps(doc, indent=2) + "\n", encoding="utf-8")
        log.debug("storage.json.written", path=str(path))
        return path

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        """CSV body preceded by ``# schema_version=…`` and ``# run_config=…`` lines."""
        path = self._path(name)
        buffer = io.StringIO()
        buffer.write(f"# schema_version={self.header.schema_version}\n")
        buffer.write(f"# run_config={_dumps(_plain(self.run_config))}\n")
        frame.to_csv(buffer, index=False, float_format=_CSV_FLOAT, lineterminator="\n")
        path.write_text(buffer.getvalue(), encoding="utf-8")
        log.debug("storage.csv.written", path=str(path), rows=len(frame))
        return path

    @contextmanager
    def open_records(self, name: str) -> Iterator[RecordWriter]:
        """Stream records to a JSON-lines file whose first line is the header."""
        path = self._path(name)
        with path.open("w", encoding="utf-8") as handle:
            handle.write(_dumps({"header": _plain(self.header)}) + "\n")
            writer = RecordWriter(handle)
            try:
                yield writer
            finally:
                log.debug("storage.records.written", path=str(path), records=writer.count)

    def write_records(self, name: str, records: Iterable[BaseModel]) -> Path:
        """Write all ``records`` at once."""
        with self.open_records(name) as writer:
            for record in records:
                writer.write(record)
        return self.out_dir / name

    # ── readers ──────────────────────────────────────────────────────────

    @staticmethod
    def read_records(path: str | Path, model: type[RecordT]) -> tuple[OutputHeader, list[RecordT]]:
        """Inverse of :meth:`write_records`.

        Raises:
            DataError: missing header or a line that does not validate.
        """
        path = Path(path)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc}") from None
        if not lines:
            raise DataError(f"{path} is empty")
        try:
            header = OutputHeader.model_validate(json.loads(lines[0])["header"])
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise DataError(f"{path}:1: missing or invalid header ({exc})") from None
        records: list[RecordT] = []
        for number, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                records.append(model.model_validate_json(line))
            except ValidationError as exc:
                msg = f"{path}:{number}: invalid record ({exc.error_count()} errors)"
                raise DataError(msg) from None
        return header, records

    @staticmethod
    def read_csv(path: str | Path) -> pd.DataFrame:
        """Read a CSV written by :meth:`write_csv`, skipping the header comments."""
        return pd.read_csv(path, comment="#")
