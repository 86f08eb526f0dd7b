"""Hot numeric kernels, numba-jitted with pure-numpy fallbacks.

Two inner loops dominate setup cost at scale: evaluating the six Green
tensors over the full offset grid, and unfolding per-frequency Toeplitz
generators into dense preconditioner blocks. Both carry an @njit
implementation and an equivalent vectorized numpy one.

Path selection: numba is used when importable unless the environment
variable VOXVIE_NO_NUMBA is set to a non-empty value other than "0".
Both paths produce identical results (same formulas, same dtype); see
benchmarks/bench_accel.py for a timing comparison.
"""

from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

FOUR_PI = 4.0 * np.pi

_disabled = os.environ.get("VOXVIE_NO_NUMBA", "").strip() not in ("", "0")
try:
    if _disabled:
        raise ImportError("disabled via VOXVIE_NO_NUMBA")
    # prefer layers that are present in this environment over TBB probing
    os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA

# Order of the six unique tensor components, used for every stacked array.
PAIRS = ("xx", "xy", "xz", "yy", "yz", "zz")
# pair index for component pair (alpha, beta)
PAIR_OF = np.array([[0, 1, 2], [1, 3, 4], [2, 4, 5]], dtype=np.int64)


def green_tensors_numpy(dz, dy, dx, k0: float) -> np.ndarray:
    """Six dyadic-Green components over an offset grid, numpy path.

    dz, dy, dx are 1-d coordinate offset arrays in meters; the result is a
    (6, len(dz), len(dy), len(dx)) complex array ordered per PAIRS. Any
    zero-distance entry is left at 0 (the self term is patched separately).
    """
    Z, Y, X = np.meshgrid(dz, dy, dx, indexing="ij")
    r2 = X * X + Y * Y + Z * Z
    zero = r2 == 0.0
    r2safe = np.where(zero, 1.0, r2)
    r = np.sqrt(r2safe)
    g = np.exp(-1j * k0 * r) / (FOUR_PI * r)
    k2 = k0 * k0
    diag = g * (k2 - (1.0 + 1j * k0 * r) / r2safe)
    radial = g * (3.0 / r2safe + 3j * k0 / r - k2) / r2safe
    out = np.empty((6,) + r.shape, dtype=np.complex128)
    out[0] = diag + radial * X * X
    out[1] = radial * X * Y
    out[2] = radial * X * Z
    out[3] = diag + radial * Y * Y
    out[4] = radial * Y * Z
    out[5] = diag + radial * Z * Z
    out[:, zero] = 0.0
    return out


def unfold_block_yz_numpy(lam: np.ndarray, m_yz: np.ndarray) -> np.ndarray:
    """Dense (3q)x(3q) block from six 2-level (y,z) Toeplitz generators.

    lam has shape (6, 2nz-1, 2ny-1) with offset index (dz+nz-1, dy+ny-1);
    m_yz has shape (nz, ny). Rows and columns are ordered
    component*q + iz*ny + iy with q = ny*nz. Returns I - M(row) * N(block).
    """
    nz1, ny1 = lam.shape[1], lam.shape[2]
    nz, ny = (nz1 + 1) // 2, (ny1 + 1) // 2
    q = ny * nz
    idx = _offset_index_yz(ny, nz)
    flat = lam.reshape(6, -1)
    blocks = flat[:, idx]  # (6, q, q)
    n_mat = np.empty((3 * q, 3 * q), dtype=np.complex128)
    for a in range(3):
        for b in range(3):
            n_mat[a * q : (a + 1) * q, b * q : (b + 1) * q] = blocks[PAIR_OF[a, b]]
    m_row = np.tile(m_yz.reshape(-1), 3)
    out = -m_row[:, None] * n_mat
    out[np.diag_indices_from(out)] += 1.0
    return out


def unfold_block_z_numpy(lam: np.ndarray, m_z: np.ndarray) -> np.ndarray:
    """Dense (3nz)x(3nz) block from six 1-level (z) Toeplitz generators.

    lam has shape (6, 2nz-1), m_z has shape (nz,). Row/column ordering is
    component*nz + iz. Returns I - M(row) * N(block).
    """
    nz = (lam.shape[1] + 1) // 2
    iz = np.arange(nz)
    idx = iz[:, None] - iz[None, :] + nz - 1
    blocks = lam[:, idx]  # (6, nz, nz)
    n_mat = np.empty((3 * nz, 3 * nz), dtype=np.complex128)
    for a in range(3):
        for b in range(3):
            n_mat[a * nz : (a + 1) * nz, b * nz : (b + 1) * nz] = blocks[PAIR_OF[a, b]]
    m_row = np.tile(np.asarray(m_z).reshape(-1), 3)
    out = -m_row[:, None] * n_mat
    out[np.diag_indices_from(out)] += 1.0
    return out


@lru_cache(maxsize=8)
def _offset_index_yz(ny: int, nz: int):
    """Flat gather indices mapping (row voxel, col voxel) -> (dz, dy) offset."""
    iz = np.arange(nz)
    iy = np.arange(ny)
    Zr, Yr = np.meshgrid(iz, iy, indexing="ij")
    zi = Zr.reshape(-1)
    yi = Yr.reshape(-1)
    dz = zi[:, None] - zi[None, :] + nz - 1
    dy = yi[:, None] - yi[None, :] + ny - 1
    idx = dz * (2 * ny - 1) + dy
    idx.setflags(write=False)
    return idx


if HAVE_NUMBA:

    @numba.njit(cache=True, parallel=True)
    def _green_tensors_jit(dz, dy, dx, k0):
        nzo, nyo, nxo = dz.size, dy.size, dx.size
        out = np.zeros((6, nzo, nyo, nxo), dtype=np.complex128)
        k2 = k0 * k0
        for izo in numba.prange(nzo):
            z = dz[izo]
            for iyo in range(nyo):
                y = dy[iyo]
                for ixo in range(nxo):
                    x = dx[ixo]
                    r2 = x * x + y * y + z * z
                    if r2 == 0.0:
                        continue
                    r = np.sqrt(r2)
                    g = np.exp(-1j * k0 * r) / (FOUR_PI * r)
                    diag = g * (k2 - (1.0 + 1j * k0 * r) / r2)
                    radial = g * (3.0 / r2 + 3j * k0 / r - k2) / r2
                    out[0, izo, iyo, ixo] = diag + radial * x * x
                    out[1, izo, iyo, ixo] = radial * x * y
                    out[2, izo, iyo, ixo] = radial * x * z
                    out[3, izo, iyo, ixo] = diag + radial * y * y
                    out[4, izo, iyo, ixo] = radial * y * z
                    out[5, izo, iyo, ixo] = diag + radial * z * z
        return out

    @numba.njit(cache=True)
    def _unfold_block_yz_jit(lam, m_yz, pair_of):
        nz1, ny1 = lam.shape[1], lam.shape[2]
        nz = (nz1 + 1) // 2
        ny = (ny1 + 1) // 2
        q = ny * nz
        out = np.empty((3 * q, 3 * q), dtype=np.complex128)
        for a in range(3):
            for izi in range(nz):
                for iyi in range(ny):
                    row = a * q + izi * ny + iyi
                    m = m_yz[izi, iyi]
                    for b in range(3):
                        p = pair_of[a, b]
                        for izj in range(nz):
                            dzo = izi - izj + nz - 1
                            for iyj in range(ny):
                                col = b * q + izj * ny + iyj
                                val = -m * lam[p, dzo, iyi - iyj + ny - 1]
                                if row == col:
                                    val += 1.0
                                out[row, col] = val
        return out

    @numba.njit(cache=True)
    def _unfold_block_z_jit(lam, m_z, pair_of):
        nz = (lam.shape[1] + 1) // 2
        out = np.empty((3 * nz, 3 * nz), dtype=np.complex128)
        for a in range(3):
            for izi in range(nz):
                row = a * nz + izi
                m = m_z[izi]
                for b in range(3):
                    p = pair_of[a, b]
                    for izj in range(nz):
                        col = b * nz + izj
                        val = -m * lam[p, izi - izj + nz - 1]
                        if row == col:
                            val += 1.0
                        out[row, col] = val
        return out


def green_tensors(dz, dy, dx, k0: float) -> np.ndarray:
    """Dispatch to the jitted or numpy Green-tensor grid evaluation."""
    dz = np.ascontiguousarray(dz, dtype=np.float64)
    dy = np.ascontiguousarray(dy, dtype=np.float64)
    dx = np.ascontiguousarray(dx, dtype=np.float64)
    if USE_NUMBA:
        return _green_tensors_jit(dz, dy, dx, float(k0))
    return green_tensors_numpy(dz, dy, dx, float(k0))


def unfold_block_yz(lam: np.ndarray, m_yz: np.ndarray) -> np.ndarray:
    if USE_NUMBA:
        return _unfold_block_yz_jit(
            np.ascontiguousarray(lam), np.ascontiguousarray(m_yz), PAIR_OF
        )
    return unfold_block_yz_numpy(lam, m_yz)


def unfold_block_z(lam: np.ndarray, m_z: np.ndarray) -> np.ndarray:
    if USE_NUMBA:
        return _unfold_block_z_jit(
            np.ascontiguousarray(lam), np.ascontiguousarray(m_z), PAIR_OF
        )
    return unfold_block_z_numpy(lam, m_z)
