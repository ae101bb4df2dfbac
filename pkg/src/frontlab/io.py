"""CSV formatting and atomic file writes shared by every output format."""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path


def fmt(value, digits=12):
    """Locale-independent number text with at most ``digits`` significant digits.

    ``None`` and NaN become the empty string (used for undefined speeds).
    """
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    text = f"{value:.{digits}g}"
    return "0" if text == "-0" else text


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows, digits=12):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v, digits) for v in row))
    return write_atomic(path, "\n".join(lines) + "\n")


def _cell(text):
    if not text:
        return None
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path):
    """Read a CSV written by ``write_csv`` into (header, rows).

    Numeric cells become floats, empty cells ``None``, anything else stays text.
    """
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rows.append([_cell(v) for v in line.split(",")])
    return header, rows
