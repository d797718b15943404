"""CSV and manifest writers for trajectories and density snapshots.

Floats are written with 17 significant digits so every file round-trips
bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .grid import DensityField, MomentumGrid

TRAJECTORY_HEADER = ("t", "total_number", "max_residual", "min_value")


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating, int, np.integer))
                             and not isinstance(v, bool) else v for v in row])
    return path


def write_trajectory_csv(traj, path) -> Path:
    rows = [(log.t, log.total_number, log.max_residual, log.min_value) for log in traj.logs]
    return write_csv(path, TRAJECTORY_HEADER, rows)


def write_density_csv(field: DensityField, path) -> Path:
    d = field.grid.dim
    header = [f"q_{i + 1}" for i in range(d)] + ["n"]
    coords = field.grid.flat_nodes
    rows = (tuple(coords[j]) + (v,) for j, v in enumerate(field.values.ravel()))
    return write_csv(path, header, rows)


def read_density_csv(path, grid: MomentumGrid) -> DensityField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape != (grid.size, grid.dim + 1):
        raise ValueError(f"{path}: expected {grid.size} rows of {grid.dim + 1} columns")
    if not np.array_equal(data[:, :-1], grid.flat_nodes):
        raise ValueError(f"{path}: node coordinates do not match the grid")
    return DensityField(grid, data[:, -1].reshape(grid.shape))


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        text = fmt(obj)
        return json.dumps(text) if text in ("nan", "inf", "-inf") else text
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float at 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_snapshots(traj, directory, manifest: dict | None = None) -> Path:
    """Write ``trajectory.csv``, one density CSV per snapshot and ``manifest.json``.

    ``manifest`` should carry whatever else is needed to re-run (params,
    config); the grid, mollifier width and snapshot index are added here.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(traj, directory / "trajectory.csv")
    snaps = []
    for i, (t, field) in enumerate(zip(traj.times, traj.fields)):
        name = f"density_{i:05d}.csv"
        write_density_csv(field, directory / name)
        snaps.append({"index": i, "t": t, "file": name})
    full = dict(manifest or {})
    full["grid"] = traj.grid.to_dict()
    full["sigma_E"] = traj.sigma
    full["snapshots"] = snaps
    return write_json(full, directory / "manifest.json")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
