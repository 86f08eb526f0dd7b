"""FFT application of the operator N and of the system A = I - M N.

Each generating tensor is embedded in its circulant extension on the
(2nz, 2ny, 2nx) padded grid and transformed once at planning time; a
matrix-vector product is then 3 forward FFTs, 9 spectral multiply-adds
using the six unique spectra, and 3 inverse FFTs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from voxvie import accel
from voxvie.grid import Physics, VoxelGrid
from voxvie.kernel import ToeplitzKernel


def _embed_circulant(gen: np.ndarray, dims: tuple[int, int, int]) -> np.ndarray:
    """Place a (2nz-1, 2ny-1, 2nx-1) generator into its (2nz, 2ny, 2nx) circulant."""
    nx, ny, nz = dims
    out = np.zeros((2 * nz, 2 * ny, 2 * nx), dtype=np.complex128)

    def slots(n):
        # positive offsets 0..n-1 land at 0..n-1, negative -(n-1)..-1 at n+1..2n-1
        src_pos = slice(n - 1, 2 * n - 1)
        src_neg = slice(0, n - 1)
        dst_pos = slice(0, n)
        dst_neg = slice(n + 1, 2 * n)
        return (src_pos, dst_pos), (src_neg, dst_neg)

    (zsp, zdp), (zsn, zdn) = slots(nz)
    (ysp, ydp), (ysn, ydn) = slots(ny)
    (xsp, xdp), (xsn, xdn) = slots(nx)
    for zs, zd in ((zsp, zdp), (zsn, zdn)):
        for ys, yd in ((ysp, ydp), (ysn, ydn)):
            for xs, xd in ((xsp, xdp), (xsn, xdn)):
                out[zd, yd, xd] = gen[zs, ys, xs]
    return out


@dataclass(frozen=True)
class OperatorPlan:
    """Precomputed padded spectra of the six generating tensors."""

    grid: VoxelGrid
    k0: float
    spectra: np.ndarray  # (6, 2nz, 2ny, 2nx)
    workers: int = 1

    @property
    def padded_shape(self) -> tuple[int, int, int]:
        return self.spectra.shape[1:]

    def storage_bytes(self) -> int:
        return self.spectra.size * 16


def plan_operator(kernel: ToeplitzKernel, workers: int = 1) -> OperatorPlan:
    """Transform the generating tensors once; the plan is reusable and immutable."""
    dims = kernel.grid.dims
    spectra = np.empty((6, 2 * dims[2], 2 * dims[1], 2 * dims[0]), dtype=np.complex128)
    for p in range(6):
        spectra[p] = scipy.fft.fftn(
            _embed_circulant(kernel.tensors[p], dims), workers=workers
        )
    spectra.setflags(write=False)
    return OperatorPlan(grid=kernel.grid, k0=kernel.k0, spectra=spectra, workers=workers)


def _as_field(plan: OperatorPlan, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.size != plan.grid.n_unknowns:
        raise ValueError(
            f"field vector has {x.size} entries, expected {plan.grid.n_unknowns}"
        )
    return x.reshape((3,) + plan.grid.shape)


def apply_n(plan: OperatorPlan, x: np.ndarray) -> np.ndarray:
    """y = N x via zero-padded FFT convolution; x is a flat 3N field vector."""
    xf = _as_field(plan, x)
    nz, ny, nx = plan.grid.shape
    shape = plan.padded_shape
    xhat = np.empty((3,) + shape, dtype=np.complex128)
    for c in range(3):
        xhat[c] = scipy.fft.fftn(xf[c], shape, workers=plan.workers)
    out = np.empty_like(xf)
    s = plan.spectra
    pair = accel.PAIR_OF
    for a in range(3):
        acc = s[pair[a, 0]] * xhat[0]
        acc += s[pair[a, 1]] * xhat[1]
        acc += s[pair[a, 2]] * xhat[2]
        out[a] = scipy.fft.ifftn(acc, workers=plan.workers)[:nz, :ny, :nx]
    return out.reshape(-1)


def apply_system(plan: OperatorPlan, m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y = (I - M N) x with the per-voxel diagonal scaling m."""
    m = np.asarray(m, dtype=np.complex128).reshape(plan.grid.shape)
    nx_times = apply_n(plan, x).reshape((3,) + plan.grid.shape)
    return (_as_field(plan, x) - m[None] * nx_times).reshape(-1)


def rhs_from_incident(m: np.ndarray, e_inc: np.ndarray, physics: Physics) -> np.ndarray:
    """Right-hand side b = j*omega*eps0 * M e_inc; vanishes on air voxels."""
    m = np.asarray(m, dtype=np.complex128)
    e = np.asarray(e_inc, dtype=np.complex128).reshape((3,) + m.shape)
    return (1j * physics.omega * physics.eps0 * m[None] * e).reshape(-1)


def field_from_currents(
    plan: OperatorPlan, w: np.ndarray, e_inc: np.ndarray, physics: Physics
) -> np.ndarray:
    """Total field e = e_inc + (N w - w)/(j omega eps0), valid at every voxel."""
    w = np.asarray(w, dtype=np.complex128).reshape(-1)
    e_inc = np.asarray(e_inc, dtype=np.complex128).reshape(-1)
    return e_inc + (apply_n(plan, w) - w) / (1j * physics.omega * physics.eps0)
