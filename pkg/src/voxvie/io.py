"""File formats emitted by the harness, each paired with its reader.

Binary field dumps are little-endian interleaved complex float64 in the
canonical unknown ordering (component-major, x fastest) with a JSON sidecar
describing the grid; CSV outputs are plain comma-separated with a header
row. Every writer here has a matching reader and round-trips exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from voxvie.grid import VoxelGrid
from voxvie.kernel import ToeplitzKernel

COMPONENT_ORDER = "x,y,z"


def write_field(path, grid: VoxelGrid, field: np.ndarray, *, wavelength: float | None = None):
    """Write field.bin plus a field.json sidecar next to it."""
    path = Path(path)
    data = np.ascontiguousarray(field, dtype="<c16").reshape(-1)
    if data.size != grid.n_unknowns:
        raise ValueError(f"field has {data.size} entries, expected {grid.n_unknowns}")
    data.tofile(path)
    sidecar = {
        "dims": [grid.nx, grid.ny, grid.nz],
        "delta": grid.delta,
        "origin": list(grid.origin),
        "component_order": COMPONENT_ORDER,
        "layout": "component-major, x fastest",
        "dtype": "complex128-le",
        "wavelength": wavelength,
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def read_field(path) -> tuple[np.ndarray, dict]:
    """Read a field.bin written by write_field; returns (flat array, sidecar)."""
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text())
    nx, ny, nz = sidecar["dims"]
    data = np.fromfile(path, dtype="<c16")
    if data.size != 3 * nx * ny * nz:
        raise ValueError(
            f"{path} holds {data.size} entries, sidecar promises {3 * nx * ny * nz}"
        )
    return data.astype(np.complex128), sidecar


def write_kernel(path, kernel: ToeplitzKernel):
    """Binary dump of the six generating tensors, dz slowest, with sidecar."""
    path = Path(path)
    np.ascontiguousarray(kernel.tensors, dtype="<c16").tofile(path)
    grid = kernel.grid
    sidecar = {
        "dims": [grid.nx, grid.ny, grid.nz],
        "delta": grid.delta,
        "k0": kernel.k0,
        "components": ["xx", "xy", "xz", "yy", "yz", "zz"],
        "offset_shape": list(kernel.tensors.shape[1:]),
        "dtype": "complex128-le",
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def read_kernel(path) -> ToeplitzKernel:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text())
    nx, ny, nz = sidecar["dims"]
    grid = VoxelGrid(nx, ny, nz, sidecar["delta"])
    tensors = np.fromfile(path, dtype="<c16").astype(np.complex128)
    tensors = tensors.reshape((6, 2 * nz - 1, 2 * ny - 1, 2 * nx - 1))
    return ToeplitzKernel(grid=grid, k0=sidecar["k0"], tensors=tensors)


def write_residuals(path, residuals, seconds_per_iter=None):
    """residuals.csv: one row per iteration with the cumulative wall time."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "relative_residual", "cumulative_seconds"])
        cum = 0.0
        for i, res in enumerate(residuals):
            if seconds_per_iter is not None and i > 0:
                cum += seconds_per_iter
            writer.writerow([i, f"{res:.16e}", f"{cum:.6f}"])


def read_residuals(path) -> list[float]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["relative_residual"]) for r in rows]


def write_csv(path, header: list[str], rows: list[list]):
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def write_report(path, report: dict):
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())
