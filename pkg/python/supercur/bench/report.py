# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
import csv
import hashlib
import io
import sys
from ..errors import ArgumentError, ParseError

HEADER = ("experiment", "m", "n", "r", "k", "l", "trials", "mean", "std",
    "failures", "entries_touched", "seconds")
FORMATS = ("csv", "table")

def _rows(reports):
    return [r.row() if hasattr(r, "row") else dict(r) for r in reports]

def _columns(rows):
    extra = sorted({k for row in rows for k in row} - set(HEADER))
    return list(HEADER) + extra

def _fmt(key, v):
    if v is None:
        return ""
    if key == "seconds":
        return f"{v:.3f}"
    if isinstance(v, float):
        return f"{v:.6e}"
    return str(v)

def _write_csv(rows, f):
    cols = _columns(rows)
    w = csv.writer(f, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(c, row.get(c)) for c in cols])

def _write_table(rows, f):
    cols = _columns(rows)
    cells = [cols] + [[_fmt(c, row.get(c)) for c in cols] for row in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(cols))]
    for line in cells:
        f.write("  ".join(v.rjust(w) for v, w in zip(line, widths)).rstrip() + "\n")

def report_write(reports, path=None, format="csv"):
    """Write reports (or row dicts) to ``path``, or stdout when ``path`` is
    None or ``-``. Columns follow HEADER, then extra columns sorted by name."""
    if format not in FORMATS:
        raise ArgumentError(f"Unknown report format: {format}")
    rows = _rows(reports)
    write = _write_csv if format == "csv" else _write_table
    if path in (None, "-"):
        write(rows, sys.stdout)
        return
    try:
        with open(path, "w", encoding="utf8", newline="") as f:
            write(rows, f)
    except OSError as e:
        raise OSError(f"{path}: cannot write report: {e}") from e

def _parse(v):
    if v == "":
        return None
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    return v

def report_read(path):
    """Rows of an emitted CSV as dicts, numbers parsed."""
    try:
        with open(path, "r", encoding="utf8", newline="") as f:
            text = f.read()
    except OSError as e:
        raise OSError(f"{path}: cannot read report: {e}") from e
    reader = csv.reader(io.StringIO(text))
    try:
        cols = next(reader)
    except StopIteration:
        raise ParseError("empty report", path, 1) from None
    if tuple(cols[:len(HEADER)]) != HEADER:
        raise ParseError(f"unexpected header {cols}", path, 1)
    rows = []
    for lineno, values in enumerate(reader, start=2):
        if len(values) != len(cols):
            raise ParseError(f"expected {len(cols)} fields, got {len(values)}", path, lineno)
        rows.append({c: _parse(v) for c, v in zip(cols, values)})
    return rows

def report_digest(reports):
    """sha256 of the CSV form without the wall-time column."""
    rows = [{k: v for k, v in row.items() if k != "seconds"} for row in _rows(reports)]
    buf = io.StringIO()
    cols = [c for c in _columns(rows) if c != "seconds"]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(c, row.get(c)) for c in cols])
    return hashlib.sha256(buf.getvalue().encode("utf8")).hexdigest()
