"""CSV ingestion for panel data.

Rows are time points and columns are series; a single non-numeric first row
is auto-detected as a header. Cells must parse as finite numbers with '.'
as the decimal separator.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import EmptyFile, ParseError, RaggedRows
from .panel import TimeSeriesPanel


def _try_parse(cell: str) -> float | None:
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_csv(path: str | Path, transpose: bool = False) -> TimeSeriesPanel:
    """Load a panel from a CSV file.

    Parameters
    ----------
    path : str or Path
        File to read.
    transpose : bool
        Set when the file stores series along rows instead of columns.

    Raises
    ------
    EmptyFile, RaggedRows, ParseError
        On an empty file, inconsistent field counts, or a cell that is not a
        finite number (error positions are 1-based and include the header
        row if present).
    """
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise EmptyFile(f"{path} contains no rows")

    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise RaggedRows(
                f"row {i + 1} has {len(row)} fields, expected {width}"
            )

    names = None
    body_start = 0
    if any(_try_parse(cell) is None for cell in rows[0]):
        names = tuple(cell.strip() for cell in rows[0])
        body_start = 1
    body = rows[body_start:]
    if not body:
        raise EmptyFile(f"{path} contains a header but no data rows")

    data = np.empty((len(body), width))
    for i, row in enumerate(body):
        for j, cell in enumerate(row):
            value = _try_parse(cell.strip())
            if value is None:
                raise ParseError(body_start + i + 1, j + 1, repr(cell.strip()))
            data[i, j] = value

    if transpose:
        data = data.T
        names = None
    return TimeSeriesPanel(data, series_names=names)
