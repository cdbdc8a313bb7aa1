"""Touchstone (.s1p/.s2p, version 1) reading and writing.

Supported: S-parameters in RI / MA / DB formats, Hz/kHz/MHz/GHz units,
`!` comments, one option line.  Two-port rows follow the standard column
order S11 S21 S12 S22; the transmission trace is taken from S21 (or S11 for
one-port files, flagged in the metadata).
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError
from .fitting import ComplexTrace

_UNIT_SCALE = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
_FORMATS = ("RI", "MA", "DB")


def _to_complex(a: np.ndarray, b: np.ndarray, fmt: str) -> np.ndarray:
    if fmt == "RI":
        return a + 1j * b
    if fmt == "MA":
        return a * np.exp(1j * np.deg2rad(b))
    # DB: 20 log10 magnitude, angle in degrees
    return 10.0 ** (a / 20.0) * np.exp(1j * np.deg2rad(b))


def parse_touchstone(data, label: str = "touchstone") -> ComplexTrace:
    """Parse file content (bytes or str) into a transmission trace.

    Raises ParseError with a line number for malformed headers, inconsistent
    row widths, or non-increasing frequencies.
    """
    if isinstance(data, bytes):
        data = data.decode("ascii", errors="replace")
    unit = None
    fmt = None
    z_ref = 50.0
    comments = []
    rows = []
    row_width = None
    saw_option = False

    for lineno, rawline in enumerate(data.splitlines(), start=1):
        line = rawline.strip()
        if not line:
            continue
        if line.startswith("!"):
            comments.append(line[1:].strip())
            continue
        if line.startswith("#"):
            if saw_option:
                raise ParseError("multiple option lines (mixed formats)", lineno)
            if rows:
                raise ParseError("option line after data", lineno)
            saw_option = True
            tokens = line[1:].upper().split()
            i = 0
            while i < len(tokens):
                tok = tokens[i]
                if tok in _UNIT_SCALE:
                    unit = tok
                elif tok in _FORMATS:
                    fmt = tok
                elif tok == "S":
                    pass
                elif tok in ("Y", "Z", "H", "G"):
                    raise ParseError("only S-parameter files are supported", lineno)
                elif tok == "R":
                    if i + 1 >= len(tokens):
                        raise ParseError("option line ends after R", lineno)
                    try:
                        z_ref = float(tokens[i + 1])
                    except ValueError:
                        raise ParseError("bad reference impedance %r" % tokens[i + 1],
                                         lineno) from None
                    i += 1
                else:
                    raise ParseError("unknown option token %r" % tok, lineno)
                i += 1
            continue
        # data row
        try:
            values = [float(tok) for tok in line.split()]
        except ValueError:
            raise ParseError("non-numeric data %r" % line, lineno) from None
        if row_width is None:
            row_width = len(values)
            if row_width not in (3, 9):
                raise ParseError(
                    "expected 3 (one-port) or 9 (two-port) columns, got %d" % row_width,
                    lineno)
        elif len(values) != row_width:
            raise ParseError("row width %d differs from first row %d"
                             % (len(values), row_width), lineno)
        rows.append((lineno, values))

    if not rows:
        raise ParseError("no data rows found")
    unit = unit or "GHZ"   # touchstone default
    fmt = fmt or "MA"      # touchstone default

    arr = np.array([v for _, v in rows], dtype=float)
    freqs = arr[:, 0] * _UNIT_SCALE[unit]
    bad = np.where(np.diff(freqs) <= 0)[0]
    if bad.size:
        raise ParseError("frequencies not strictly increasing", rows[bad[0] + 1][0])

    if arr.shape[1] == 3:
        values = _to_complex(arr[:, 1], arr[:, 2], fmt)
        parameter = "S11"
    else:
        # column order S11 S21 S12 S22: S21 occupies columns 3 and 4
        values = _to_complex(arr[:, 3], arr[:, 4], fmt)
        parameter = "S21"

    meta = {
        "source": label,
        "parameter": parameter,
        "reference_impedance": z_ref,
        "frequency_unit": unit,
        "format": fmt,
        "comments": comments,
    }
    return ComplexTrace(freqs, values, meta)


def read_touchstone(path) -> ComplexTrace:
    with open(path, "rb") as fh:
        return parse_touchstone(fh.read(), label=str(path))


def write_touchstone(trace: ComplexTrace, ports: int = 2, unit: str = "GHz",
                     fmt: str = "RI", z_ref: float = 50.0,
                     precision: int = 12) -> str:
    """Serialize a trace; two-port output places it in the S21 slot with the
    remaining parameters zero.  Values re-parse to the printed precision."""
    unit_key = unit.upper()
    if unit_key not in _UNIT_SCALE:
        raise ParseError("unsupported frequency unit %r" % unit)
    fmt_key = fmt.upper()
    if fmt_key not in _FORMATS:
        raise ParseError("unsupported format %r" % fmt)
    if ports not in (1, 2):
        raise ParseError("ports must be 1 or 2")

    def num(v):
        return "%.*g" % (precision, v)

    def pair(v):
        if fmt_key == "RI":
            return num(v.real), num(v.imag)
        mag, ang = abs(v), np.rad2deg(np.angle(v))
        if fmt_key == "MA":
            return num(mag), num(ang)
        db = 20.0 * np.log10(mag) if mag > 0 else -400.0
        return num(db), num(ang)

    lines = ["! generated by qbartools"]
    lines.append("# %s S %s R %s" % (unit_key, fmt_key, num(z_ref)))
    zero = pair(complex(1e-300, 0.0) if fmt_key == "DB" else 0j)
    for f, v in zip(trace.freqs, trace.values):
        cols = [num(f / _UNIT_SCALE[unit_key])]
        if ports == 1:
            cols += pair(v)
        else:
            cols += zero + pair(v) + zero + zero
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"
