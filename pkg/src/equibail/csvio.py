"""Atomic CSV emission with round-trippable floats (17 significant digits)."""

from __future__ import annotations

import os
import tempfile

import numpy as np


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, fieldnames, rows, comment: str | None = None) -> None:
    """Write rows (sequences aligned with fieldnames) atomically; '#' header comment optional."""
    lines = []
    if comment:
        lines.append("# " + comment)
    lines.append(",".join(fieldnames))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_matrix_csv(path: str, matrix, comment: str | None = None) -> None:
    """Dense row-major matrix dump, one CSV line per row."""
    m = np.asarray(matrix)
    lines = []
    if comment:
        lines.append("# " + comment)
    for row in np.atleast_2d(m):
        lines.append(",".join(format_value(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_csv(path: str):
    """Read a CSV written by write_csv: returns (fieldnames, list of string rows)."""
    with open(path, "r", newline="") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:] if ln]
    return header, rows
