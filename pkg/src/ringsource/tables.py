"""CSV helpers for XY data and result tables."""

from __future__ import annotations

import csv
import io
import os
from typing import Iterable, Sequence

from .config import atomic_write_text
from .errors import ValidationError
from .estimation import XYSeries


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_table_csv(path: str | os.PathLike, header: Sequence[str],
                    rows: Iterable[Sequence]) -> None:
    """Write rows with a header; floats at 17 significant digits (lossless)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValidationError(f"row has {len(row)} fields, header has {len(header)}")
        w.writerow([_fmt(v) for v in row])
    atomic_write_text(path, buf.getvalue())


def read_table_csv(path: str | os.PathLike) -> tuple[list[str], list[list[float]]]:
    """Read a numeric CSV with a header row."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValidationError(f"{path}: empty file")
        header = [h.strip() for h in header]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
    return header, rows


def read_xy_csv(path: str | os.PathLike) -> XYSeries:
    """First column is x, second y, optional third the y uncertainty."""
    header, rows = read_table_csv(path)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    if len(header) < 2:
        raise ValidationError(f"{path}: need at least two columns")
    x = [r[0] for r in rows]
    y = [r[1] for r in rows]
    sigma = [r[2] for r in rows] if len(header) >= 3 else None
    return XYSeries(x, y, sigma)
