"""CSV loading with strict schema checks against the producer's contracts."""

from __future__ import annotations

import os

import numpy as np

INFUSION_COLUMNS = ("x", "endowment", "endowment_post", "value_pre", "value_post", "iota")
EXPERIMENT_COLUMNS = ("experiment", "n", "seed", "block", "metric", "value")


class SchemaError(ValueError):
    """Input columns do not match the expected contract."""


def _read_rows(path):
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, newline="") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:] if ln]
    return header, rows


def _check_schema(path, header, expected):
    if list(header) == list(expected):
        return
    missing = [c for c in expected if c not in header]
    extra = [c for c in header if c not in expected]
    parts = [f"{path}: column mismatch"]
    if missing:
        parts.append(f"missing columns {missing}")
    if extra:
        parts.append(f"unexpected columns {extra}")
    if not missing and not extra:
        parts.append(f"column order must be {list(expected)}")
    raise SchemaError("; ".join(parts))


def load_infusion_grid(path) -> dict[str, np.ndarray]:
    """figure_infusion.csv as named float arrays, sorted by x."""
    header, rows = _read_rows(path)
    _check_schema(path, header, INFUSION_COLUMNS)
    data = np.array([[float(v) for v in row] for row in rows])
    data = data[np.argsort(data[:, 0])]
    return {name: data[:, i] for i, name in enumerate(INFUSION_COLUMNS)}


def load_experiment_rows(path):
    """Experiment CSV as a list of (metric, n, value) with available metric names."""
    header, rows = _read_rows(path)
    _check_schema(path, header, EXPERIMENT_COLUMNS)
    records = [(row[4], int(row[1]), float(row[5])) for row in rows]
    metrics = sorted({m for m, _, _ in records})
    return records, metrics
