"""CSV and key=value file formats."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .measures import DiscreteMeasure, MeasureError, make_measure


class InputError(ValueError):
    """Malformed input file; the message names the file and row."""


def read_measure_csv(path) -> DiscreteMeasure:
    """Point cloud with header ``x1,...,xd[,w]``; no ``w`` column means uniform."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        has_w = bool(header) and header[-1].lower() == "w"
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not v.strip() for v in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise InputError(f"{path}: no data rows")
    data = np.array(rows)
    if has_w and data.shape[1] < 2:
        raise InputError(f"{path}: need at least one coordinate column besides 'w'")
    points = data[:, :-1] if has_w else data
    weights = data[:, -1] if has_w else None
    try:
        return make_measure(points, weights)
    except MeasureError as exc:
        raise InputError(f"{path}: {exc}") from None


def write_measure_csv(path, measure: DiscreteMeasure) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{k + 1}" for k in range(measure.dim)] + ["w"])
        for point, weight in zip(measure.support, measure.weights):
            writer.writerow([repr(float(v)) for v in point] + [repr(float(weight))])


def read_matrix_csv(path, header: bool = True) -> np.ndarray:
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=2 if header else 1):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise InputError(f"{path}: expected a nonempty rectangular table")
    return np.array(rows)


def read_labels_csv(path) -> np.ndarray:
    """Single-column label file with a header row."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        labels = [row[-1].strip() for row in reader if row]
    if not labels:
        raise InputError(f"{path}: no labels")
    return np.array(labels)


def write_rows_csv(path, rows: list[dict]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    path = Path(path)
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out
