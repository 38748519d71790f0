"""File formats: CSV samples/records/tables and JSON matrices/reports.

Floats are serialized with Python's shortest round-trip representation,
so write-then-read reproduces values bit-exactly.  All writers go
through a temp file plus atomic rename; a failed run never leaves a
partially written output.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from typing import Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1


class DataFormatError(ValueError):
    """Malformed input data; carries 1-based row/column location."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


def _fmt(x: float) -> str:
    return repr(float(x))


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_sample_csv(path: str) -> np.ndarray:
    """Numeric CSV with a mandatory header row -> n x d array.

    Non-numeric cells are reported with their 1-based data row and
    column indices.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file: a header row is required")
        width = len(header)
        rows: list[list[float]] = []
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != width:
                raise DataFormatError(
                    f"row {i} has {len(row)} cells, expected {width}", row=i
                )
            parsed = []
            for j, cell in enumerate(row, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"non-numeric value {cell!r} at row {i}, column {j}",
                        row=i,
                        column=j,
                    )
            rows.append(parsed)
    if not rows:
        raise DataFormatError("no data rows after the header")
    return np.asarray(rows, dtype=float)


def write_sample_csv(path: str, X: np.ndarray, header: Sequence[str] | None = None) -> None:
    X = np.asarray(X, dtype=float)
    if header is None:
        header = [f"x{j + 1}" for j in range(X.shape[1])]
    lines = [",".join(header)]
    for row in X:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_matrix_json(path: str, matrix: np.ndarray, **extra) -> None:
    matrix = np.asarray(matrix, dtype=float)
    payload = {"schema": SCHEMA_VERSION, "d": matrix.shape[0], "matrix": matrix.tolist()}
    payload.update(extra)
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def read_matrix_json(path: str) -> np.ndarray:
    with open(path) as fh:
        payload = json.load(fh)
    return np.asarray(payload["matrix"], dtype=float)


def write_matrix_csv(path: str, matrix: np.ndarray) -> None:
    write_sample_csv(path, np.asarray(matrix, dtype=float))


def write_json(path: str, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def write_records_csv(path: str, records, estimators: Sequence[str]) -> None:
    header = ["trial"]
    for name in estimators:
        header += [f"excess_{name}", f"error_{name}"]
    lines = [",".join(header)]
    for rec in records:
        cells = [str(rec.trial)]
        for name in estimators:
            v = rec.excess.get(name)
            cells.append("" if v is None else _fmt(v))
            cells.append(rec.errors.get(name, "").replace(",", ";"))
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_table_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
