"""CSV and JSON interchange.

CSV: UTF-8, LF line endings, comma separator, header ``t,f`` for input grids
and ``t,value,trust`` for operator output. Lines starting with ``#`` before
the header are comments (the CLI writes its resolved config there). Floats are
written with 17 significant digits, so emit then ingest is lossless.
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .errors import FormatError, NonUniformGrid
from .fields import GridFunction

__all__ = ["fmt", "ingest_csv", "read_grid_csv", "emit_grid_csv", "write_csv", "dumps_json"]

SPACING_RTOL = 1e-9


def fmt(v):
    """17-significant-digit text for a float (round-trips exactly)."""
    return format(float(v), ".17g")


def read_grid_csv(text, source="<input>"):
    lines = text.splitlines()
    lineno = 0
    while lineno < len(lines) and lines[lineno].startswith("#"):
        lineno += 1
    if lineno >= len(lines) or [c.strip() for c in lines[lineno].split(",")] != ["t", "f"]:
        raise FormatError(f"{source}: expected header 't,f'", line=lineno + 1)
    ts, fs = [], []
    for k, row in enumerate(csv.reader(lines[lineno + 1:]), start=lineno + 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise FormatError(f"{source}: expected 2 columns, got {len(row)}", line=k)
        try:
            t, f = float(row[0]), float(row[1])
        except ValueError:
            raise FormatError(f"{source}: non-numeric entry {row!r}", line=k) from None
        if not (math.isfinite(t) and math.isfinite(f)):
            raise FormatError(f"{source}: non-finite entry {row!r}", line=k)
        ts.append(t)
        fs.append(f)
    if len(ts) < 2:
        raise FormatError(f"{source}: need at least two data rows", line=lineno + 2)
    t = np.array(ts)
    steps = np.diff(t)
    h = (t[-1] - t[0]) / (t.size - 1)
    if not h > 0 or np.max(np.abs(steps - h)) > SPACING_RTOL * abs(h):
        raise NonUniformGrid(f"{source}: abscissae are not uniformly spaced (tolerance {SPACING_RTOL:g} relative)")
    return GridFunction(t[0], t[-1], np.array(fs))


def ingest_csv(path):
    """Read a ``t,f`` CSV file into a GridFunction, checking uniform spacing."""
    with open(path, encoding="utf-8", newline="") as fh:
        return read_grid_csv(fh.read(), source=str(path))


def write_csv(header, rows, comments=()):
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in row) + "\n")
    return buf.getvalue()


def emit_grid_csv(grid, path=None, comments=()):
    text = write_csv(("t", "f"), zip(grid.t.tolist(), grid.values.tolist()), comments)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def _json(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_json(v, indent, level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent, level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    return json.dumps(obj)


def dumps_json(obj, indent=2):
    """Deterministic JSON: insertion-ordered keys, floats at 17 significant digits."""
    return _json(obj, indent, 0) + "\n"
