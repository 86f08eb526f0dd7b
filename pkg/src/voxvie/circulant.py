"""Circulant preconditioning suite.

Built on the optimal (Frobenius-closest) circulant approximation applied at
the matrix level along the long x axis, leaving dense LU-factorized blocks
per x frequency; variants reduce memory by discarding near-duplicate blocks
(proxy rule), push the approximation to a second level along y, or apply
independent preconditioners on disjoint geometry boxes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy.linalg import circulant as _dense_circulant
from scipy.linalg import lu_factor, lu_solve

from voxvie import accel
from voxvie.errors import PartitionError, PreconditionerBuildError
from voxvie.grid import PermittivityMap, VoxelGrid, homogenize
from voxvie.kernel import ToeplitzKernel

BYTES_PER_ENTRY = 16  # complex128


# ---------------------------------------------------------------------------
# Chan circulant approximation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChanCirculant:
    """First-column generator of the optimal circulant approximation."""

    n: int
    c: np.ndarray

    def to_dense(self) -> np.ndarray:
        return _dense_circulant(self.c)


def chan_circulant(first_col, first_row=None) -> ChanCirculant:
    """Closest circulant (Frobenius norm) to the Toeplitz matrix given by
    its first column (t_0..t_{n-1}) and first row (t_0, t_{-1}, .., t_{-(n-1)}).

    c_i = ((n-i)/n) t_i + (i/n) t_{-(n-i)}; a circulant input is a fixed point.
    """
    col = np.asarray(first_col, dtype=np.complex128).reshape(-1)
    row = col if first_row is None else np.asarray(first_row, np.complex128).reshape(-1)
    n = col.size
    if n < 1 or row.size != n:
        raise ValueError("first column and first row must share a length >= 1")
    c = np.empty(n, dtype=np.complex128)
    c[0] = col[0]
    for i in range(1, n):
        c[i] = ((n - i) * col[i] + i * row[n - i]) / n
    return ChanCirculant(n=n, c=c)


def chan_along_axis(gen: np.ndarray, axis: int) -> np.ndarray:
    """Apply the Chan formula along one offset axis of a generating tensor.

    The axis has odd length 2n-1 holding offsets -(n-1)..n-1; the result has
    length n holding the circulant generator for shifts 0..n-1.
    """
    gen = np.moveaxis(gen, axis, -1)
    n = (gen.shape[-1] + 1) // 2
    s = np.arange(1, n)
    out = np.empty(gen.shape[:-1] + (n,), dtype=np.complex128)
    out[..., 0] = gen[..., n - 1]
    out[..., 1:] = ((n - s) * gen[..., n - 1 + s] + s * gen[..., s - 1]) / n
    return np.moveaxis(out, -1, axis)


# ---------------------------------------------------------------------------
# Helpers shared by the block builders
# ---------------------------------------------------------------------------


def _constant_along(m: np.ndarray, axis: int, what: str) -> None:
    lead = np.take(m, [0], axis=axis)
    if not np.allclose(m, lead, rtol=0.0, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise ValueError(f"homogenized coefficient must be constant along {what}")


def _coerce_mtilde(grid: VoxelGrid, mtilde: np.ndarray) -> np.ndarray:
    m = np.asarray(mtilde, dtype=np.complex128)
    if m.shape == grid.shape:
        _constant_along(m, 2, "x")
        return m[:, :, 0]
    if m.shape == (grid.nz, grid.ny):
        return m
    raise ValueError(
        f"mtilde shape {m.shape} not compatible with grid {grid.shape}"
    )


def _proxy_column(ny: int, nz: int) -> int:
    """0-based column of the block entry used as the reduction proxy.

    Convention (pinned by a characterization test): the proxy is the
    unfactorized block entry coupling the first and the last cross-section
    voxel in the x component, i.e. (row, column) = (1, ny*nz) 1-based. This
    is the most-separated transverse pair, whose spectrum drops below the
    reduction tolerance away from the propagating band; centered or
    near-neighbor entries keep a static near-field plateau above any useful
    tolerance and discard nothing.
    """
    return ny * nz - 1


def _lu_factor_checked(block: np.ndarray, what: str):
    lu, piv = lu_factor(block, check_finite=False)
    d = np.abs(np.diag(lu))
    if not np.all(np.isfinite(d)) or np.any(d == 0.0):
        raise PreconditionerBuildError(f"singular {what}")
    return lu, piv


def _check_cap(bytes_needed: int, cap_bytes: int, hint: str):
    if bytes_needed > cap_bytes:
        raise PreconditionerBuildError(
            f"preconditioner needs {bytes_needed} bytes, above the cap "
            f"{cap_bytes}; {hint}"
        )


def _chan_x_spectra(kernel: ToeplitzKernel) -> np.ndarray:
    """Chan-approximate along x, then DFT the shift axis.

    Returns lamhat with shape (6, 2nz-1, 2ny-1, nx); slice [..., k] holds the
    2-level (y,z) Toeplitz generators of the k-th frequency block of N.
    """
    chan = chan_along_axis(kernel.tensors, axis=3)
    return scipy.fft.fft(chan, axis=3)


# ---------------------------------------------------------------------------
# 1-level preconditioner
# ---------------------------------------------------------------------------


@dataclass
class OneLevelPrec:
    """Per-x-frequency dense LU blocks of the circulant-approximated system."""

    grid: VoxelGrid
    lu: np.ndarray  # (nx, 3q, 3q)
    piv: np.ndarray  # (nx, 3q)
    proxy: np.ndarray  # (nx,) unfactorized D_k entry at the proxy position
    level = "one-level"

    @property
    def block_size(self) -> int:
        return self.lu.shape[1]

    @property
    def bytes(self) -> int:
        return self.grid.nx * self.block_size**2 * BYTES_PER_ENTRY

    def apply(self, x: np.ndarray) -> np.ndarray:
        return _apply_blocks_x(self.grid, x, lambda k: (self.lu[k], self.piv[k]))

    def summary(self) -> dict:
        return {
            "level": self.level,
            "blocks": int(self.grid.nx),
            "block_size": int(self.block_size),
            "bytes": int(self.bytes),
        }


def _apply_blocks_x(grid: VoxelGrid, x: np.ndarray, lu_of) -> np.ndarray:
    """DFT along x, per-frequency block solve, inverse DFT. x: (3N,) or (3N, r)."""
    x = np.asarray(x, dtype=np.complex128)
    flat_in = x.ndim == 1
    x2 = x.reshape(grid.n_unknowns, -1)
    nz, ny, nx = grid.shape
    xf = x2.reshape(3, nz, ny, nx, -1)
    r = xf.shape[-1]
    spec = scipy.fft.fft(xf, axis=3)
    for k in range(nx):
        rhs = np.ascontiguousarray(spec[:, :, :, k, :]).reshape(-1, r)
        sol = lu_solve(lu_of(k), rhs, check_finite=False)
        spec[:, :, :, k, :] = sol.reshape(3, nz, ny, r)
    out = scipy.fft.ifft(spec, axis=3).reshape(x2.shape)
    return out.reshape(-1) if flat_in else out.reshape(x.shape)


def build_one_level(
    kernel: ToeplitzKernel,
    mtilde: np.ndarray,
    *,
    cap_bytes: int = 2**31,
) -> OneLevelPrec:
    """Assemble and factorize the nx frequency blocks D_k = I - M~ Lambda_k.

    mtilde must be constant along x (use grid.homogenize); block storage is
    nx * (3*ny*nz)^2 complex entries, guarded by cap_bytes.
    """
    grid = kernel.grid
    nx, ny, nz = grid.dims
    m_yz = _coerce_mtilde(grid, mtilde)
    q = ny * nz
    _check_cap(
        nx * (3 * q) ** 2 * BYTES_PER_ENTRY,
        cap_bytes,
        "consider the 2-level preconditioner",
    )
    lamhat = _chan_x_spectra(kernel)
    c0 = _proxy_column(ny, nz)
    lu = np.empty((nx, 3 * q, 3 * q), dtype=np.complex128)
    piv = np.empty((nx, 3 * q), dtype=np.int32)
    proxy = np.empty(nx, dtype=np.complex128)
    for k in range(nx):
        block = accel.unfold_block_yz(lamhat[:, :, :, k], m_yz)
        proxy[k] = block[0, c0]
        try:
            lu[k], piv[k] = _lu_factor_checked(block, f"frequency block k={k}")
        except PreconditionerBuildError:
            raise PreconditionerBuildError(
                f"1-level build failed: singular frequency block k={k}"
            ) from None
    return OneLevelPrec(grid=grid, lu=lu, piv=piv, proxy=proxy)


# ---------------------------------------------------------------------------
# Reduced 1-level preconditioner
# ---------------------------------------------------------------------------


@dataclass
class ReducedOneLevelPrec:
    """1-level variant keeping only blocks with significant proxy values.

    Frequencies whose normalized proxy is at or below the tolerance are
    routed to the central representative block.
    """

    grid: VoxelGrid
    kept: np.ndarray  # sorted kept frequency indices
    slot_of: np.ndarray  # (nx,) index into lu for every frequency
    representative: int
    lu: np.ndarray  # (n_kept, 3q, 3q)
    piv: np.ndarray
    proxy: np.ndarray
    proxy_normalized: np.ndarray
    tol: float
    level = "reduced-one-level"

    @property
    def block_size(self) -> int:
        return self.lu.shape[1]

    @property
    def n_kept(self) -> int:
        return self.lu.shape[0]

    @property
    def bytes(self) -> int:
        return self.n_kept * self.block_size**2 * BYTES_PER_ENTRY

    def apply(self, x: np.ndarray) -> np.ndarray:
        return _apply_blocks_x(
            self.grid,
            x,
            lambda k: (self.lu[self.slot_of[k]], self.piv[self.slot_of[k]]),
        )

    def summary(self) -> dict:
        return {
            "level": self.level,
            "blocks": int(self.grid.nx),
            "kept": int(self.n_kept),
            "discarded": int(self.grid.nx - self.n_kept),
            "block_size": int(self.block_size),
            "tol": self.tol,
            "bytes": int(self.bytes),
        }


def _select_kept(proxy: np.ndarray, nx: int, tol: float):
    if not 0.0 <= tol <= 1.0:
        raise ValueError(f"reduction tolerance must lie in [0, 1], got {tol}")
    vmax = np.abs(proxy).max()
    v_hat = np.abs(proxy) / vmax if vmax > 0 else np.zeros(proxy.shape)
    rep = int(np.ceil(nx / 2)) - 1  # central block, 1-based ceil(nx/2)
    mask = v_hat > tol
    mask[rep] = True
    kept = np.flatnonzero(mask)
    slot_of = np.full(nx, int(np.searchsorted(kept, rep)), dtype=np.int64)
    slot_of[kept] = np.arange(kept.size)
    return kept, slot_of, rep, v_hat


def reduce_one_level(prec: OneLevelPrec, tol: float = 1e-3) -> ReducedOneLevelPrec:
    """Discard LU factors of low-proxy frequencies from a built 1-level."""
    nx = prec.grid.nx
    kept, slot_of, rep, v_hat = _select_kept(prec.proxy, nx, tol)
    return ReducedOneLevelPrec(
        grid=prec.grid,
        kept=kept,
        slot_of=slot_of,
        representative=rep,
        lu=prec.lu[kept].copy(),
        piv=prec.piv[kept].copy(),
        proxy=prec.proxy.copy(),
        proxy_normalized=v_hat,
        tol=float(tol),
    )


def build_reduced_one_level(
    kernel: ToeplitzKernel,
    mtilde: np.ndarray,
    tol: float = 1e-3,
    *,
    cap_bytes: int = 2**31,
) -> ReducedOneLevelPrec:
    """Economical direct build: proxies first, LU only for kept blocks."""
    grid = kernel.grid
    nx, ny, nz = grid.dims
    m_yz = _coerce_mtilde(grid, mtilde)
    q = ny * nz
    lamhat = _chan_x_spectra(kernel)
    c0 = _proxy_column(ny, nz)
    # proxy = unfactorized D_k[0, c0]; row voxel is (iy=0, iz=0), component x
    jz, jy = divmod(c0, ny)
    proxy = (1.0 if c0 == 0 else 0.0) + -m_yz[0, 0] * lamhat[
        0, nz - 1 - jz, ny - 1 - jy, :
    ]
    kept, slot_of, rep, v_hat = _select_kept(proxy, nx, tol)
    _check_cap(
        kept.size * (3 * q) ** 2 * BYTES_PER_ENTRY,
        cap_bytes,
        "consider the 2-level preconditioner",
    )
    lu = np.empty((kept.size, 3 * q, 3 * q), dtype=np.complex128)
    piv = np.empty((kept.size, 3 * q), dtype=np.int32)
    for slot, k in enumerate(kept):
        block = accel.unfold_block_yz(lamhat[:, :, :, k], m_yz)
        lu[slot], piv[slot] = _lu_factor_checked(block, f"frequency block k={k}")
    return ReducedOneLevelPrec(
        grid=grid,
        kept=kept,
        slot_of=slot_of,
        representative=rep,
        lu=lu,
        piv=piv,
        proxy=proxy,
        proxy_normalized=v_hat,
        tol=float(tol),
    )


# ---------------------------------------------------------------------------
# 2-level preconditioner
# ---------------------------------------------------------------------------


@dataclass
class TwoLevelPrec:
    """Dense LU blocks per (x, y) frequency pair after two Chan levels."""

    grid: VoxelGrid
    lu: np.ndarray  # (ny, nx, 3nz, 3nz)
    piv: np.ndarray  # (ny, nx, 3nz)
    level = "two-level"

    @property
    def block_size(self) -> int:
        return self.lu.shape[2]

    @property
    def bytes(self) -> int:
        return self.grid.nx * self.grid.ny * self.block_size**2 * BYTES_PER_ENTRY

    def apply(self, x: np.ndarray) -> np.ndarray:
        grid = self.grid
        x = np.asarray(x, dtype=np.complex128)
        flat_in = x.ndim == 1
        x2 = x.reshape(grid.n_unknowns, -1)
        nz, ny, nx = grid.shape
        xf = x2.reshape(3, nz, ny, nx, -1)
        r = xf.shape[-1]
        spec = scipy.fft.fftn(xf, axes=(2, 3))
        for l in range(ny):
            for k in range(nx):
                rhs = np.ascontiguousarray(spec[:, :, l, k, :]).reshape(-1, r)
                sol = lu_solve((self.lu[l, k], self.piv[l, k]), rhs, check_finite=False)
                spec[:, :, l, k, :] = sol.reshape(3, nz, r)
        out = scipy.fft.ifftn(spec, axes=(2, 3)).reshape(x2.shape)
        return out.reshape(-1) if flat_in else out.reshape(x.shape)

    def summary(self) -> dict:
        return {
            "level": self.level,
            "blocks": int(self.grid.nx * self.grid.ny),
            "block_size": int(self.block_size),
            "bytes": int(self.bytes),
        }


def build_two_level(
    kernel: ToeplitzKernel,
    mtilde: np.ndarray,
    *,
    cap_bytes: int = 2**31,
) -> TwoLevelPrec:
    """Chan approximation along x then y; blocks D_{k,l} of size (3nz)^2.

    mtilde must be constant along both x and y (mode homogenization gives a
    global constant); storage is nx*ny*(3nz)^2 complex entries.
    """
    grid = kernel.grid
    nx, ny, nz = grid.dims
    m = np.asarray(mtilde, dtype=np.complex128)
    if m.shape == grid.shape:
        _constant_along(m, 2, "x")
        _constant_along(m, 1, "y")
        m_z = m[:, 0, 0]
    elif m.shape == (nz,):
        m_z = m
    elif m.ndim == 0:
        m_z = np.full(nz, m, dtype=np.complex128)
    else:
        raise ValueError(f"mtilde shape {m.shape} not usable for a 2-level build")
    _check_cap(
        nx * ny * (3 * nz) ** 2 * BYTES_PER_ENTRY,
        cap_bytes,
        "reduce the box size or cross-section",
    )
    chan2 = chan_along_axis(chan_along_axis(kernel.tensors, axis=3), axis=2)
    lamhat = scipy.fft.fftn(chan2, axes=(2, 3))  # (6, 2nz-1, ny, nx)
    lu = np.empty((ny, nx, 3 * nz, 3 * nz), dtype=np.complex128)
    piv = np.empty((ny, nx, 3 * nz), dtype=np.int32)
    for l in range(ny):
        for k in range(nx):
            block = accel.unfold_block_z(lamhat[:, :, l, k], m_z)
            try:
                lu[l, k], piv[l, k] = _lu_factor_checked(block, "block")
            except PreconditionerBuildError:
                raise PreconditionerBuildError(
                    f"2-level build failed: singular block (k={k}, l={l})"
                ) from None
    return TwoLevelPrec(grid=grid, lu=lu, piv=piv)


def apply_one_level(prec, x: np.ndarray) -> np.ndarray:
    """Functional alias for prec.apply(x) (1-level or reduced)."""
    return prec.apply(x)


def apply_two_level(prec: TwoLevelPrec, x: np.ndarray) -> np.ndarray:
    return prec.apply(x)


# ---------------------------------------------------------------------------
# Geometry partitioning and the blocked preconditioner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Axis-aligned half-open voxel index box [x0,x1) x [y0,y1) x [z0,z1)."""

    label: str
    x0: int
    x1: int
    y0: int
    y1: int
    z0: int
    z1: int

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.x1 - self.x0, self.y1 - self.y0, self.z1 - self.z0)

    def n_voxels(self) -> int:
        bx, by, bz = self.dims
        return bx * by * bz

    def overlaps(self, other: "Box") -> bool:
        return (
            self.x0 < other.x1
            and other.x0 < self.x1
            and self.y0 < other.y1
            and other.y0 < self.y1
            and self.z0 < other.z1
            and other.z0 < self.z1
        )


@dataclass(frozen=True)
class Partition:
    grid: VoxelGrid
    boxes: tuple[Box, ...]

    @property
    def covered_voxels(self) -> int:
        return sum(b.n_voxels() for b in self.boxes)

    @property
    def identity_voxels(self) -> int:
        return self.grid.n_voxels - self.covered_voxels


def partition_boxes(grid: VoxelGrid, boxes) -> Partition:
    """Validate a list of boxes: inside the grid and pairwise disjoint."""
    boxes = tuple(boxes)
    bad = []
    for b in boxes:
        if not (
            0 <= b.x0 < b.x1 <= grid.nx
            and 0 <= b.y0 < b.y1 <= grid.ny
            and 0 <= b.z0 < b.z1 <= grid.nz
        ):
            bad.append(b.label)
    if bad:
        raise PartitionError(f"boxes out of grid bounds: {bad}")
    overlapping = [
        (a.label, b.label)
        for i, a in enumerate(boxes)
        for b in boxes[i + 1 :]
        if a.overlaps(b)
    ]
    if overlapping:
        raise PartitionError(f"overlapping boxes: {overlapping}")
    return Partition(grid=grid, boxes=boxes)


_DEFAULT_HOMOG = {
    "one-level": "real_mean_x",
    "reduced-one-level": "real_mean_x",
    "two-level": "mode",
}


@dataclass
class BlockedPrec:
    """Block-diagonal preconditioner over a geometry partition.

    Each box carries its own circulant preconditioner built on the box's
    sub-kernel; degrees of freedom outside every box see the identity.
    """

    grid: VoxelGrid
    partition: Partition
    box_precs: list
    box_dofs: list  # global dof index arrays, canonical ordering per box
    level = "blocked"

    @property
    def bytes(self) -> int:
        return sum(p.bytes for p in self.box_precs)

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        y = x.copy()
        for prec, dofs in zip(self.box_precs, self.box_dofs):
            y[dofs] = prec.apply(x[dofs])
        return y

    def summary(self) -> dict:
        return {
            "level": self.level,
            "boxes": [
                dict(label=b.label, **p.summary())
                for b, p in zip(self.partition.boxes, self.box_precs)
            ],
            "identity_voxels": int(self.partition.identity_voxels),
            "bytes": int(self.bytes),
        }


def _slice_kernel(kernel: ToeplitzKernel, box: Box) -> ToeplitzKernel:
    """Restrict the translation-invariant kernel to a box's offset range."""
    grid = kernel.grid
    bx, by, bz = box.dims
    cz, cy, cx = grid.nz - 1, grid.ny - 1, grid.nx - 1
    sub = kernel.tensors[
        :,
        cz - (bz - 1) : cz + bz,
        cy - (by - 1) : cy + by,
        cx - (bx - 1) : cx + bx,
    ]
    ox, oy, oz = grid.origin
    sub_grid = VoxelGrid(
        bx,
        by,
        bz,
        grid.delta,
        origin=(
            ox + grid.delta * box.x0,
            oy + grid.delta * box.y0,
            oz + grid.delta * box.z0,
        ),
    )
    return ToeplitzKernel(grid=sub_grid, k0=kernel.k0, tensors=np.ascontiguousarray(sub))


def _box_dof_indices(grid: VoxelGrid, box: Box) -> np.ndarray:
    all_idx = np.arange(grid.n_unknowns).reshape((3,) + grid.shape)
    return np.ascontiguousarray(
        all_idx[:, box.z0 : box.z1, box.y0 : box.y1, box.x0 : box.x1]
    ).reshape(-1)


def build_blocked(
    kernel: ToeplitzKernel,
    pmap: PermittivityMap,
    partition: Partition,
    levels: dict[str, str],
    *,
    homog: dict[str, str] | None = None,
    reduce_tol: float = 1e-3,
    cap_bytes: int = 2**31,
) -> BlockedPrec:
    """Build a per-box circulant preconditioner for each partition box.

    levels maps box labels to "one-level" | "reduced-one-level" | "two-level";
    homog optionally overrides the per-level default homogenization strategy.
    """
    homog = homog or {}
    box_precs = []
    box_dofs = []
    for box in partition.boxes:
        choice = levels[box.label]
        sub_kernel = _slice_kernel(kernel, box)
        sub_map = PermittivityMap(
            sub_kernel.grid,
            pmap.eps_r[box.z0 : box.z1, box.y0 : box.y1, box.x0 : box.x1],
        )
        strategy = homog.get(box.label, _DEFAULT_HOMOG[choice])
        mtilde = homogenize(sub_map, strategy)
        if choice == "one-level":
            prec = build_one_level(sub_kernel, mtilde, cap_bytes=cap_bytes)
        elif choice == "reduced-one-level":
            prec = build_reduced_one_level(
                sub_kernel, mtilde, reduce_tol, cap_bytes=cap_bytes
            )
        elif choice == "two-level":
            prec = build_two_level(sub_kernel, mtilde, cap_bytes=cap_bytes)
        else:
            raise ValueError(f"unknown per-box level {choice!r} for {box.label!r}")
        box_precs.append(prec)
        box_dofs.append(_box_dof_indices(kernel.grid, box))
    return BlockedPrec(
        grid=kernel.grid, partition=partition, box_precs=box_precs, box_dofs=box_dofs
    )


# ---------------------------------------------------------------------------
# Test/validation helpers: artificially circulant operators
# ---------------------------------------------------------------------------


def wrap_circulant_x(kernel: ToeplitzKernel) -> ToeplitzKernel:
    """Kernel whose negative x offsets are wrapped: t(-d) := t(nx - d).

    The resulting dense operator is exactly circulant along x, so the
    1-level preconditioner built from it is its exact inverse. Parity
    invariants of a physical kernel do not survive the wrap.
    """
    nx = kernel.grid.nx
    t = kernel.tensors.copy()
    t[..., : nx - 1] = t[..., nx : 2 * nx - 1]
    return ToeplitzKernel(grid=kernel.grid, k0=kernel.k0, tensors=t)


def wrap_circulant_xy(kernel: ToeplitzKernel) -> ToeplitzKernel:
    """Wrap both the x and y offset axes (exact target for the 2-level)."""
    ny = kernel.grid.ny
    t = wrap_circulant_x(kernel).tensors.copy()
    t[:, :, : ny - 1, :] = t[:, :, ny : 2 * ny - 1, :]
    return ToeplitzKernel(grid=kernel.grid, k0=kernel.k0, tensors=t)
