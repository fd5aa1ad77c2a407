"""Plain-text output: gnuplot-ready field dumps, CSV tables, JSON manifests.

A field dump holds one quantity: a ``# {json}`` metadata line, a
``# x p name`` column line, then ``x p value`` rows in blocks of constant ``x``
separated by blank lines, the layout ``splot`` expects::

    gnuplot -e "set pm3d map; splot 'hybrid_0000_rho_c.dat' using 1:2:3 with pm3d; pause -1"
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .hybrid_state import HybridDensity
from .phase_grid import PhaseGrid

__all__ = [
    "to_jsonable",
    "write_json",
    "write_csv",
    "write_field",
    "read_field",
    "write_slice",
    "density_fields",
    "write_density",
    "write_trajectory",
]


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_field(path, grid: PhaseGrid, values, name: str, meta: dict | None = None) -> Path:
    """Dump one real scalar field in the ``splot`` block layout."""
    values = np.asarray(grid.check(values), dtype=float)
    head = {"L": grid.L, "N": grid.N, "quantity": name, **(meta or {})}
    path = Path(path)
    a = grid.axis
    with path.open("w") as fh:
        fh.write("# " + json.dumps(to_jsonable(head), sort_keys=True) + "\n")
        fh.write(f"# x p {name}\n")
        for i in range(grid.N):
            np.savetxt(fh, np.column_stack([np.full(grid.N, a[i]), a, values[i]]), fmt="%.17g")
            fh.write("\n")
    return path


def read_field(path) -> tuple[dict, np.ndarray]:
    """Inverse of :func:`write_field`: ``(meta, (N, N) array)``."""
    path = Path(path)
    with path.open() as fh:
        meta = json.loads(fh.readline()[2:])
    data = np.loadtxt(path, comments="#")
    return meta, data[:, 2].reshape(meta["N"], meta["N"])


def write_slice(path, grid: PhaseGrid, fields: dict, axis: str = "x", at: float = 0.0) -> Path:
    """CSV of fields along one axis at the node nearest ``at`` on the other axis."""
    if axis not in ("x", "p"):
        raise ValueError(f"axis must be 'x' or 'p', got {axis!r}")
    i, j = grid.nearest_index(at, at)
    cut = (slice(None), j) if axis == "x" else (i, slice(None))
    cols = [np.asarray(grid.check(f), dtype=float)[cut] for f in fields.values()]
    return write_csv(path, [axis, *fields], np.column_stack([grid.axis, *cols]))


def density_fields(rho: HybridDensity) -> dict:
    """Classical marginal plus Pauli fields (``d = 2``) or matrix entries."""
    out = {"rho_c": rho.trace_field()}
    if rho.dim == 2:
        a = rho.pauli_fields()
        out.update(a1=a[1], a2=a[2], a3=a[3])
    else:
        for i in range(rho.dim):
            for j in range(rho.dim):
                out[f"re_{i}{j}"] = rho.values[i, j].real
                out[f"im_{i}{j}"] = rho.values[i, j].imag
    return out


def write_density(directory, stem: str, rho: HybridDensity, meta: dict | None = None) -> list[str]:
    """One dump per component, named ``{stem}_{component}.dat``."""
    directory = Path(directory)
    names = []
    for comp, f in density_fields(rho).items():
        name = f"{stem}_{comp}.dat"
        write_field(directory / name, rho.grid, f, comp, {"time": rho.time, **(meta or {})})
        names.append(name)
    return names


DIAGNOSTIC_COLUMNS = ["time", "norm", "min_eigenvalue", "max_s", "non_hermiticity"]


def write_trajectory(directory, traj, stem: str) -> list[dict]:
    """Snapshot dumps plus a per-step diagnostics CSV; returns manifest entries."""
    directory = Path(directory)
    entries = []
    for k, rho in enumerate(traj.states):
        files = write_density(directory, f"{stem}_{k:04d}", rho, {"trajectory": stem, "method": traj.method})
        entries.append({"kind": "snapshot", "files": files, "time": rho.time})
    name = f"{stem}_diagnostics.csv"
    write_csv(directory / name, DIAGNOSTIC_COLUMNS, traj.diagnostics_table())
    entries.append({"kind": "diagnostics", "file": name})
    return entries
