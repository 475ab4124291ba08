"""Round-trip CSV helpers with locale-independent 17-digit formatting."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(value) -> str:
    """Format a number so that ``float(fmt(v)) == v`` exactly.

    ``'.17g'`` switches to scientific notation for magnitudes below 1e-4,
    and never depends on the locale.
    """
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path, header: Sequence[str], columns: Iterable) -> Path:
    """Write equal-length columns under ``header``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c) if not isinstance(c, list) else c for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns have different lengths")
    with path.open("w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(n):
            w.writerow([fmt(c[i]) for c in cols])
    return path


def read_csv(path) -> dict:
    """Read a CSV written by :func:`write_csv` into a dict of arrays.

    Columns that do not parse as floats are returned as lists of strings.
    """
    path = Path(path)
    with path.open(newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        raw = [r[j] for r in body]
        try:
            out[name] = np.array([float(v) for v in raw])
        except ValueError:
            out[name] = raw
    return out
