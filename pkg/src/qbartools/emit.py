"""CSV / JSON output with atomic writes.

All numeric output uses 12 significant digits, which exceeds every fit
tolerance while keeping files diffable; identical inputs therefore produce
byte-identical files.  Writes go to a temporary sibling and are renamed into
place, so error paths never leave partial output behind.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import ParseError
from .fitting import ComplexTrace

PRECISION = 12


def format_number(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.*g" % (PRECISION, float(v))


def atomic_write_text(path, text: str):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if tmp.exists():
            tmp.unlink()
        raise


def csv_text(header: list[str], rows, comments: list[str] | None = None) -> str:
    lines = ["# " + c for c in (comments or [])]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header: list[str], rows, comments: list[str] | None = None):
    atomic_write_text(path, csv_text(header, rows, comments))


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_csv_columns(path) -> tuple[list[str], np.ndarray]:
    """Read a comma-separated file with one header row and # comments."""
    header = None
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                raise ParseError("expected %d columns, got %d"
                                 % (len(header), len(cells)), lineno)
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                raise ParseError("non-numeric cell in %r" % line, lineno) from None
    if header is None or not rows:
        raise ParseError("no data found in %s" % path)
    return header, np.array(rows, dtype=float)


def write_trace_csv(path, trace: ComplexTrace, comments: list[str] | None = None):
    rows = zip(trace.freqs, trace.values.real, trace.values.imag)
    write_csv(path, ["freq_hz", "s21_re", "s21_im"], rows, comments)


def read_trace_csv(path) -> ComplexTrace:
    header, data = read_csv_columns(path)
    cols = {name: i for i, name in enumerate(header)}
    for needed in ("freq_hz", "s21_re", "s21_im"):
        if needed not in cols:
            raise ParseError("missing column %r in %s" % (needed, path))
    values = data[:, cols["s21_re"]] + 1j * data[:, cols["s21_im"]]
    return ComplexTrace(data[:, cols["freq_hz"]], values, {"source": str(path)})


def write_map_csv(path, row_label: str, rows: np.ndarray, col_label: str,
                  cols: np.ndarray, value_label: str, values: np.ndarray,
                  comments: list[str] | None = None):
    """Long-format 2-D map: one line per (row, col) cell."""
    out = []
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            out.append((r, c, values[i, j]))
    write_csv(path, [row_label, col_label, value_label], out, comments)
