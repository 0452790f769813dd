"""CSV and JSON writers with a fixed, byte-stable layout."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .numerics import ComplexField, FrequencyGrid, SpatialGrid


def _num(v: float) -> str:
    return format(float(v), ".17g")


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def field_csv(f: ComplexField) -> str:
    """``x,re,im``; for frequency-domain fields the first column holds gamma."""
    lines = ["x,re,im"]
    for x, v in zip(f.grid.points, f.samples):
        lines.append(f"{_num(x)},{_num(v.real)},{_num(v.imag)}")
    return "\n".join(lines) + "\n"


def matrix_csv(M: np.ndarray) -> str:
    M = np.asarray(M, dtype=complex)
    lines = ["row,col,re,im"]
    for (r, c), v in np.ndenumerate(M):
        lines.append(f"{r},{c},{_num(v.real)},{_num(v.imag)}")
    return "\n".join(lines) + "\n"


def write_field(path, f: ComplexField):
    _write(Path(path), field_csv(f))


def write_matrix(path, M):
    _write(Path(path), matrix_csv(M))


def read_field(path, grid: SpatialGrid | FrequencyGrid | None = None) -> ComplexField:
    """Read an ``x,re,im`` file back; the grid is rebuilt from the first column if not given."""
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["x", "re", "im"]:
        raise ValueError(f"{path}: expected header x,re,im")
    data = np.array([[float(c) for c in r] for r in rows[1:]])
    if grid is None:
        grid = SpatialGrid(float(data[0, 0]), float(data[-1, 0]), len(data))
    return ComplexField(data[:, 1] + 1j * data[:, 2], grid)


def read_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["row", "col", "re", "im"]:
        raise ValueError(f"{path}: expected header row,col,re,im")
    body = [(int(r), int(c), float(a), float(b)) for r, c, a, b in rows[1:]]
    n = max(r for r, *_ in body) + 1
    m = max(c for _, c, *_ in body) + 1
    M = np.zeros((n, m), dtype=complex)
    for r, c, a, b in body:
        M[r, c] = a + 1j * b
    return M


def dump_json(path, obj):
    buf = io.StringIO()
    json.dump(obj, buf, indent=2, sort_keys=True, allow_nan=False)
    buf.write("\n")
    _write(Path(path), buf.getvalue())
