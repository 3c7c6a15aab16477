"""CSV/JSON exchange formats.

A sample is an ``n x m`` CSV without header (rows are curves, columns grid
points).  Grid metadata lives in a sidecar ``<stem>.grid.json`` holding
``{"m": ..., "rule": "equidistant"}``; without a sidecar the equidistant grid
with ``m`` = number of columns is assumed.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .hilbert import Curve, Grid, HSOperator, Sample, make_equidistant_grid


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".grid.json")


def read_grid_sidecar(path) -> Grid | None:
    side = sidecar_path(path)
    if not side.exists():
        return None
    meta = json.loads(side.read_text())
    if meta.get("rule", "equidistant") != "equidistant":
        raise InvalidArgument(f"unsupported grid rule {meta.get('rule')!r} in {side}")
    return make_equidistant_grid(int(meta["m"]))


def write_grid_sidecar(path, grid: Grid) -> Path:
    side = sidecar_path(path)
    side.write_text(json.dumps(grid.to_json_dict()) + "\n")
    return side


def _read_matrix(path) -> np.ndarray:
    try:
        values = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise InvalidArgument(f"{path}: {exc}") from exc
    if values.size == 0:
        raise InvalidArgument(f"{path} is empty")
    return values


def read_sample_csv(path) -> Sample:
    values = _read_matrix(path)
    grid = read_grid_sidecar(path) or make_equidistant_grid(values.shape[1])
    if grid.m != values.shape[1]:
        raise InvalidArgument(f"{path}: {values.shape[1]} columns but the sidecar says m={grid.m}")
    return Sample(grid, values)


def read_curve_csv(path, grid: Grid | None = None) -> Curve:
    values = _read_matrix(path)
    if values.shape[0] != 1:
        raise InvalidArgument(f"{path}: expected a single row, got {values.shape[0]}")
    grid = grid or read_grid_sidecar(path) or make_equidistant_grid(values.shape[1])
    return Curve(grid, values[0])


def _write_matrix(path, values: np.ndarray) -> Path:
    path = Path(path)
    np.savetxt(path, np.atleast_2d(values), delimiter=",", fmt="%.17g")
    return path


def write_sample_csv(path, sample: Sample, sidecar: bool = True) -> Path:
    path = _write_matrix(path, sample.values)
    if sidecar:
        write_grid_sidecar(path, sample.grid)
    return path


def write_curve_csv(path, curve: Curve, sidecar: bool = True) -> Path:
    path = _write_matrix(path, curve.values[None, :])
    if sidecar:
        write_grid_sidecar(path, curve.grid)
    return path


def write_kernel_csv(path, op: HSOperator) -> Path:
    return _write_matrix(path, op.kernel)


def write_json(path, record: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(record, indent=2, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(record: dict) -> str:
    return json.dumps(record, default=_json_default)
