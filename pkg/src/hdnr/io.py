"""CSV ingestion and emission for data matrices.

Rows are observations, columns are variables. A header row is
auto-detected (first row containing any cell that does not parse as a
number) and skipped. Loaded matrices are stabilized so downstream
diagonal-variance inverses stay defined.
"""
from __future__ import annotations

import csv

import numpy as np

from .matrix_core import DataError, DataMatrix, stabilize


def _parse_cell(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def load_matrix(path: str, delimiter: str = ",",
                eps: float = 1e-10) -> DataMatrix:
    """Read a CSV file into a stabilized DataMatrix.

    Raises DataError with row/column coordinates for ragged or
    non-numeric input. Row numbers in messages are 1-based file lines.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delimiter)
                if any(cell.strip() for cell in row)]
    if not rows:
        raise DataError(f"{path}: empty file")

    start = 0
    if any(_parse_cell(c) is None for c in rows[0]):
        start = 1
        if len(rows) == 1:
            raise DataError(f"{path}: header row but no data")

    width = len(rows[start])
    data = np.empty((len(rows) - start, width))
    for i, row in enumerate(rows[start:], start=start):
        if len(row) != width:
            raise DataError(
                f"{path}: row {i + 1} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            v = _parse_cell(cell)
            if v is None:
                raise DataError(
                    f"{path}: non-numeric cell at row {i + 1}, "
                    f"column {j + 1}: {cell.strip()!r}")
            data[i - start, j] = v
    try:
        return stabilize(DataMatrix(data), eps=eps)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_matrix(path: str, x: DataMatrix, delimiter: str = ",") -> None:
    """Write a matrix with enough digits to round-trip doubles exactly."""
    np.savetxt(path, x.values, fmt="%.17g", delimiter=delimiter)


def load_contrast(path: str, delimiter: str = ",") -> np.ndarray:
    """Read a contrast/design/coefficient matrix; no stabilization."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delimiter)
                if any(cell.strip() for cell in row)]
    if not rows:
        raise DataError(f"{path}: empty file")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"{path}: row {i + 1} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            v = _parse_cell(cell)
            if v is None:
                raise DataError(
                    f"{path}: non-numeric cell at row {i + 1}, "
                    f"column {j + 1}: {cell.strip()!r}")
            out[i, j] = v
    return out
