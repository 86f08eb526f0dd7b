"""Assembly of the discretized curl-curl integral operator.

The Galerkin matrix over the voxel grid is three-level Toeplitz per
component pair, so the whole operator is held as six generating tensors
indexed by the signed voxel offset (dx, dy, dz). Off-diagonal (non-self)
entries use centroid quadrature of the double voxel integral, which reduces
to V * G(delta*d) with G the free-space dyadic Green function; the singular
self entry has a closed-form reduction to a scalar double-cube integral
evaluated by Duffy-transformed Gauss quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from voxvie import accel
from voxvie.errors import QuadratureError, SizeLimitError
from voxvie.grid import VoxelGrid

FOUR_PI = 4.0 * np.pi

#: hard cap on the number of unknowns any dense-oracle routine will build
DENSE_GUARD = 6000


def scalar_green(r: float, k0: float):
    """Scalar Helmholtz kernel e^{-j k0 r} / (4 pi r); r must be positive."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("scalar_green requires r > 0")
    return np.exp(-1j * k0 * r) / (FOUR_PI * r)


def dyadic_green(rvec, k0: float) -> np.ndarray:
    """Free-space dyadic kernel (k0^2 I + grad grad) g at a nonzero offset.

    Complex-symmetric 3x3 matrix; diagonal entries are even in rvec and the
    off-diagonal (a, b) entry is odd under a sign flip of either coordinate.
    """
    rvec = np.asarray(rvec, dtype=float)
    r2 = float(rvec @ rvec)
    if r2 == 0.0:
        raise ValueError("dyadic_green is singular at zero offset")
    r = np.sqrt(r2)
    g = np.exp(-1j * k0 * r) / (FOUR_PI * r)
    diag = g * (k0 * k0 - (1.0 + 1j * k0 * r) / r2)
    radial = g * (3.0 / r2 + 3j * k0 / r - k0 * k0) / r2
    return diag * np.eye(3) + radial * np.outer(rvec, rvec)


def _gauss_rule(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w  # mapped to [0, 1]


def _cube_pair_integral(delta: float, k0: float, order: int) -> complex:
    """Double integral of the scalar kernel over a coincident voxel pair.

    Reduces the 6-d integral to the difference cube with the triangular
    correlation weight, folds symmetry into one Duffy pyramid (the 1/r
    singularity cancels against the Jacobian), and applies a tensor
    Gauss-Legendre rule of the given order.
    """
    t, w = _gauss_rule(order)
    rho = delta * t  # radial-like Duffy variable
    wr = delta * w
    A, B = np.meshgrid(t, t, indexing="ij")
    WAB = np.outer(w, w)
    u = np.sqrt(1.0 + A * A + B * B)
    total = 0.0 + 0.0j
    for i in range(order):
        p = rho[i]
        f = (
            (delta - p)
            * (delta - p * A)
            * (delta - p * B)
            * p
            * np.exp(-1j * k0 * p * u)
            / u
        )
        total += wr[i] * np.sum(WAB * f)
    return 24.0 * total / FOUR_PI


@lru_cache(maxsize=64)
def _cube_pair_integral_adaptive(delta: float, k0: float, rtol: float) -> complex:
    prev = _cube_pair_integral(delta, k0, 8)
    achieved = np.inf
    for order in (12, 18, 27, 40):
        cur = _cube_pair_integral(delta, k0, order)
        achieved = abs(cur - prev) / max(abs(cur), 1e-300)
        if achieved <= rtol:
            return cur
        prev = cur
    raise QuadratureError("self-term quadrature did not converge", achieved)


def self_term(delta: float, k0: float, rtol: float = 1e-12) -> np.ndarray:
    """Galerkin self element of the operator: isotropic 3x3 diagonal.

    The curl-curl of the volume potential splits into an identity part and
    second derivatives of the scalar kernel; on the coincident voxel pair
    the trace identity and cubic symmetry collapse everything to

        S = (2/3) * (1 + k0^2 * I_g / V) * eye(3)

    with I_g the double-cube integral of the scalar kernel.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    ig = _cube_pair_integral_adaptive(float(delta), float(k0), float(rtol))
    value = (2.0 / 3.0) * (1.0 + k0 * k0 * ig / delta**3)
    return value * np.eye(3, dtype=np.complex128)


@dataclass(frozen=True)
class ToeplitzKernel:
    """Six generating tensors of the discretized operator.

    tensors has shape (6, 2nz-1, 2ny-1, 2nx-1) ordered per accel.PAIRS with
    offset index (dz+nz-1, dy+ny-1, dx+nx-1); the entry at offset d equals
    the Galerkin element for any voxel pair separated by d.
    """

    grid: VoxelGrid
    k0: float
    tensors: np.ndarray

    def storage_entries(self) -> int:
        """Number of stored complex entries: 6*(2nx-1)(2ny-1)(2nz-1)."""
        nx, ny, nz = self.grid.dims
        return 6 * (2 * nx - 1) * (2 * ny - 1) * (2 * nz - 1)

    def storage_bytes(self) -> int:
        return self.storage_entries() * 16

    def component(self, name: str) -> np.ndarray:
        return self.tensors[accel.PAIRS.index(name)]


def _gauss_cube_points(delta: float, n: int):
    t, w = _gauss_rule(n)
    pts = delta * (t - 0.5)
    P = np.stack(np.meshgrid(pts, pts, pts, indexing="ij"), axis=-1).reshape(-1, 3)
    W = np.einsum("i,j,k->ijk", w, w, w).reshape(-1) * delta**3
    return P, W


def assemble_kernel(
    grid: VoxelGrid, k0: float, *, near_gauss: bool = False
) -> ToeplitzKernel:
    """Populate the six generating tensors for a grid and wavenumber.

    Non-self entries are V * G(delta*d); the d = 0 entry is the quadrature
    self term. With near_gauss=True, offsets at Chebyshev distance 1 are
    re-integrated with a 3^3 Gauss rule over the source voxel, which
    improves element accuracy without touching the Toeplitz structure.
    """
    if not k0 * grid.delta < 2.0:
        raise ValueError(
            f"k0*delta = {k0 * grid.delta:.3f} too coarse; need k0*delta < 2"
        )
    nx, ny, nz = grid.dims
    d = grid.delta
    dx = d * np.arange(-(nx - 1), nx)
    dy = d * np.arange(-(ny - 1), ny)
    dz = d * np.arange(-(nz - 1), nz)
    tensors = accel.green_tensors(dz, dy, dx, k0)
    tensors *= grid.voxel_volume

    self_diag = self_term(d, k0)[0, 0]
    c = (nz - 1, ny - 1, nx - 1)
    for p, pair in enumerate(accel.PAIRS):
        tensors[(p,) + c] = self_diag if pair in ("xx", "yy", "zz") else 0.0

    if near_gauss:
        pts, wts = _gauss_cube_points(d, 3)
        for ddz in (-1, 0, 1):
            for ddy in (-1, 0, 1):
                for ddx in (-1, 0, 1):
                    if ddx == ddy == ddz == 0:
                        continue
                    if abs(ddx) >= nx or abs(ddy) >= ny or abs(ddz) >= nz:
                        continue
                    rc = d * np.array([ddx, ddy, ddz], dtype=float)
                    acc = np.zeros((3, 3), dtype=np.complex128)
                    for p_src, w_src in zip(rc - pts, wts):
                        acc += w_src * dyadic_green(p_src, k0)
                    loc = (c[0] + ddz, c[1] + ddy, c[2] + ddx)
                    for p, pair in enumerate(accel.PAIRS):
                        a, b = "xyz".index(pair[0]), "xyz".index(pair[1])
                        tensors[(p,) + loc] = acc[a, b]

    tensors.setflags(write=False)
    return ToeplitzKernel(grid=grid, k0=float(k0), tensors=tensors)


def _check_dense_guard(n_unknowns: int, guard: int = DENSE_GUARD):
    if n_unknowns > guard:
        raise SizeLimitError(
            f"dense oracle refused: {n_unknowns} unknowns exceeds guard {guard}"
        )


def dense_n(kernel: ToeplitzKernel) -> np.ndarray:
    """Dense 3N x 3N reconstruction of the operator from its generators.

    Truth oracle for the FFT apply and the preconditioners; guarded to
    small instances.
    """
    grid = kernel.grid
    _check_dense_guard(grid.n_unknowns)
    nx, ny, nz = grid.dims
    n = grid.n_voxels
    iz, iy, ix = np.unravel_index(np.arange(n), grid.shape)
    off = (
        (iz[:, None] - iz[None, :] + nz - 1) * (2 * ny - 1)
        + (iy[:, None] - iy[None, :] + ny - 1)
    ) * (2 * nx - 1) + (ix[:, None] - ix[None, :] + nx - 1)
    flat = kernel.tensors.reshape(6, -1)
    out = np.empty((3 * n, 3 * n), dtype=np.complex128)
    for a in range(3):
        for b in range(3):
            out[a * n : (a + 1) * n, b * n : (b + 1) * n] = flat[accel.PAIR_OF[a, b]][
                off
            ]
    return out


def dense_operator(kernel: ToeplitzKernel, m: np.ndarray) -> np.ndarray:
    """Dense system matrix A = I - M N with per-voxel coefficient m."""
    grid = kernel.grid
    _check_dense_guard(grid.n_unknowns)
    m_flat = np.tile(np.asarray(m, dtype=np.complex128).reshape(-1), 3)
    if m_flat.size != grid.n_unknowns:
        raise ValueError("coefficient map size does not match grid")
    a = -m_flat[:, None] * dense_n(kernel)
    a[np.diag_indices_from(a)] += 1.0
    return a
