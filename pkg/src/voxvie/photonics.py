"""Geometry builders for the device studies, absorbers, and dipole excitation.

All builders map the long axis of the device to x (the circulant level-1
axis), voxelize curved boundaries by the center-inside rule, and return the
permittivity map together with a labeled partition hint for the blocked
preconditioner. The simulation background is always eps_r = 1; cladded
material systems use the pre-normalized "_in_" entries of MATERIALS.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from voxvie import accel
from voxvie.circulant import Box, partition_boxes
from voxvie.grid import (
    PermittivityMap,
    Physics,
    VoxelGrid,
    material_permittivity,
)


@dataclass(frozen=True)
class PartitionHint:
    """Labeled boxes emitted by a builder, with suggested per-box levels."""

    boxes: tuple[Box, ...]
    levels: dict[str, str]

    def validate(self, grid: VoxelGrid):
        return partition_boxes(grid, self.boxes)


def _resolve_eps(core) -> complex:
    return material_permittivity(core) if isinstance(core, str) else complex(core)


def absorber_profile(s, max_imag: float, exponent: float = 3.0):
    """Imaginary-permittivity ramp eps''(s) = max * s^p over normalized depth s."""
    return max_imag * np.asarray(s, dtype=float) ** exponent


def append_absorber(
    pmap: PermittivityMap,
    end: str,
    length_vox: int,
    ramp_exponent: float = 3.0,
    max_imag: float | None = None,
) -> PermittivityMap:
    """Ramp eps_r'' over the last length_vox x slabs of one domain end.

    The ramp follows absorber_profile sampled at voxel centers, starting at
    zero on the inner interface; eps_r' is left unchanged and air voxels are
    not touched. max_imag defaults to each voxel's own Re(eps_r), i.e. a
    loss tangent of one at the truncation.
    """
    if end not in ("low_x", "high_x"):
        raise ValueError(f"end must be 'low_x' or 'high_x', got {end!r}")
    if not length_vox > 0:
        raise ValueError("absorber length must be positive")
    nx = pmap.grid.nx
    if length_vox > nx:
        raise ValueError(f"absorber of {length_vox} voxels longer than domain ({nx})")
    eps = pmap.eps_r.copy()
    # depth grows toward the truncation face
    depth = (np.arange(length_vox) + 0.5) / length_vox
    if end == "high_x":
        cols = np.arange(nx - length_vox, nx)
    else:
        cols = np.arange(length_vox - 1, -1, -1)
    for s, ix in zip(depth, cols):
        slab = eps[:, :, ix]
        dielectric = slab != 1.0
        cap = np.broadcast_to(
            slab.real if max_imag is None else max_imag, slab.shape
        )
        loss = absorber_profile(s, 1.0, ramp_exponent) * cap
        slab[dielectric] = slab.real[dielectric] - 1j * loss[dielectric]
    return PermittivityMap(pmap.grid, eps)


def build_waveguide(
    length_lint: float,
    physics: Physics,
    core="si_in_sio2",
    *,
    vpw: int = 20,
    cross_lint: tuple[float, float] = (1.12, 0.56),
    cross_vox: tuple[int, int] | None = None,
    length_vox: int | None = None,
    clad_margin: int = 0,
    absorber_lint: float = 0.0,
    absorber_exponent: float = 3.0,
) -> tuple[PermittivityMap, PartitionHint]:
    """Straight strip waveguide extruded along x.

    The default cross-section is 1.12 x 0.56 interior wavelengths; explicit
    voxel counts may override both the cross-section and the length for
    desk-scale runs. clad_margin adds that many background voxels on every
    transverse side (zero margin gives an all-dielectric box).
    """
    eps_core = _resolve_eps(core)
    lint = physics.interior_wavelength(eps_core)
    delta = lint / vpw
    wy, wz = (
        cross_vox
        if cross_vox is not None
        else (round(cross_lint[0] * vpw), round(cross_lint[1] * vpw))
    )
    nx = length_vox if length_vox is not None else round(length_lint * vpw)
    n_abs = round(absorber_lint * vpw)
    nx += n_abs
    if min(wy, wz, nx) < 1:
        raise ValueError(f"degenerate waveguide dims ({nx}, {wy}, {wz})")
    ny, nz = wy + 2 * clad_margin, wz + 2 * clad_margin
    grid = VoxelGrid(nx, ny, nz, delta)
    eps = np.ones(grid.shape, dtype=np.complex128)
    eps[
        clad_margin : clad_margin + wz, clad_margin : clad_margin + wy, :
    ] = eps_core
    pmap = PermittivityMap(grid, eps)
    if n_abs:
        pmap = append_absorber(pmap, "high_x", n_abs, absorber_exponent)
    hint = PartitionHint(
        boxes=(Box("guide", 0, nx, 0, ny, 0, nz),),
        levels={"guide": "one-level"},
    )
    return pmap, hint


def build_bragg(
    physics: Physics,
    core="si",
    *,
    n_per: int = 10,
    w_nm: float = 500.0,
    dw_nm: float = 40.0,
    pitch_nm: float = 320.0,
    height_nm: float = 220.0,
    vpw: int = 22,
    delta_nm: float | None = None,
    lead_periods: int = 1,
    clad_margin: int = 0,
    absorber_lint: float = 0.0,
    absorber_exponent: float = 3.0,
) -> tuple[PermittivityMap, PartitionHint]:
    """Bragg grating: a waveguide whose width modulates between W - dW and
    W + dW with a square profile of period pitch_nm along x, between uniform
    lead-in/lead-out segments of width W, optionally terminated by absorbers.
    """
    if not dw_nm < w_nm:
        raise ValueError(f"corrugation dW={dw_nm} must be smaller than W={w_nm}")
    if n_per < 1:
        raise ValueError("need at least one grating period")
    eps_core = _resolve_eps(core)
    lint = physics.interior_wavelength(eps_core)
    delta = (delta_nm * 1e-9) if delta_nm is not None else lint / vpw
    nm = 1e-9
    w_wide = round((w_nm + dw_nm) * nm / delta)
    w_narrow = round((w_nm - dw_nm) * nm / delta)
    w_lead = round(w_nm * nm / delta)
    period = round(pitch_nm * nm / delta)
    nz_core = round(height_nm * nm / delta)
    if min(w_narrow, period, nz_core) < 1:
        raise ValueError("voxel pitch too coarse for the requested Bragg geometry")
    n_abs = round(absorber_lint * lint / delta)
    n_lead = lead_periods * period
    nx = n_per * period + 2 * n_lead + 2 * n_abs
    ny = w_wide + 2 * clad_margin
    nz = nz_core + 2 * clad_margin
    grid = VoxelGrid(nx, ny, nz, delta)

    widths = np.full(nx, w_lead, dtype=int)
    x0 = n_abs + n_lead
    half = period // 2
    for p in range(n_per):
        start = x0 + p * period
        widths[start : start + half] = w_wide
        widths[start + half : start + period] = w_narrow
    eps = np.ones(grid.shape, dtype=np.complex128)
    z0 = clad_margin
    for ix in range(nx):
        w = widths[ix]
        y0 = clad_margin + (w_wide - w) // 2
        eps[z0 : z0 + nz_core, y0 : y0 + w, ix] = eps_core
    pmap = PermittivityMap(grid, eps)
    if n_abs:
        pmap = append_absorber(pmap, "low_x", n_abs, absorber_exponent)
        pmap = append_absorber(pmap, "high_x", n_abs, absorber_exponent)
    hint = PartitionHint(
        boxes=(Box("grating", 0, nx, 0, ny, 0, nz),),
        levels={"grating": "one-level"},
    )
    return pmap, hint


def build_disk_resonator(
    radius_lint: float,
    gap_vox: int,
    physics: Physics,
    core="si",
    *,
    vpw: int = 20,
    bus_width_vox: int = 5,
    height_vox: int = 3,
    bus_extra_lint: float = 0.5,
    absorber_lint: float = 0.0,
    absorber_exponent: float = 3.0,
) -> tuple[PermittivityMap, PartitionHint]:
    """Staircase-voxelized disk beside a bus waveguide, separated by a gap.

    The bus runs the full x extent below the disk; the partition hint marks
    the disk box for the 2-level preconditioner and the bus box for the
    reduced 1-level. The bus gap has no reference value and must be chosen.
    """
    if not radius_lint > 0:
        raise ValueError("disk radius must be positive")
    if gap_vox < 1:
        raise ValueError("bus gap must be at least one cladding voxel")
    eps_core = _resolve_eps(core)
    lint = physics.interior_wavelength(eps_core)
    delta = lint / vpw
    r_vox = round(radius_lint * vpw)
    d_vox = 2 * r_vox
    n_abs = round(absorber_lint * vpw)
    nx = d_vox + 2 * round(bus_extra_lint * vpw) + 2 * n_abs
    ny = bus_width_vox + gap_vox + d_vox
    nz = height_vox
    grid = VoxelGrid(nx, ny, nz, delta)
    eps = np.ones(grid.shape, dtype=np.complex128)
    eps[:, :bus_width_vox, :] = eps_core

    disk_x0 = (nx - d_vox) // 2
    disk_y0 = bus_width_vox + gap_vox
    cx = (disk_x0 + r_vox) * delta
    cy = (disk_y0 + r_vox) * delta
    xs = delta * (np.arange(nx) + 0.5)
    ys = delta * (np.arange(ny) + 0.5)
    inside = (xs[None, :] - cx) ** 2 + (ys[:, None] - cy) ** 2 <= (r_vox * delta) ** 2
    eps[:, inside] = eps_core

    pmap = PermittivityMap(grid, eps)
    if n_abs:
        pmap = append_absorber(pmap, "low_x", n_abs, absorber_exponent)
        pmap = append_absorber(pmap, "high_x", n_abs, absorber_exponent)
    boxes = (
        Box("bus", 0, nx, 0, bus_width_vox, 0, nz),
        Box("disk", disk_x0, disk_x0 + d_vox, disk_y0, disk_y0 + d_vox, 0, nz),
    )
    hint = PartitionHint(
        boxes=boxes, levels={"bus": "reduced-one-level", "disk": "two-level"}
    )
    hint.validate(grid)
    return pmap, hint


def build_directional_coupler(
    straight_vox: int,
    physics: Physics,
    core="si_in_sio2",
    *,
    vpw: int = 20,
    width_vox: int = 5,
    height_vox: int = 4,
    gap_vox: int = 2,
    fan_len_vox: int = 2,
    fan_offset_vox: int = 1,
    outer_margin_vox: int = 1,
    absorber_lint: float = 0.0,
    absorber_exponent: float = 3.0,
) -> tuple[PermittivityMap, PartitionHint]:
    """Two coupled straight guides with staircase fan-outs at both ends.

    The guides run parallel about the y mid-plane, separated by gap_vox
    over the central coupling section of straight_vox columns; toward each
    port they step away from the mid-plane by fan_offset_vox over a
    staircase of fan_len_vox columns. With absorbers enabled the staircase
    sits at mid-depth of the absorbing region, so the bend discontinuity is
    damped before it reaches the ports. The partition hint assigns a
    1-level box to each y half.
    """
    if not straight_vox > 0:
        raise ValueError("coupling length must be positive")
    if gap_vox < 2 or gap_vox % 2:
        raise ValueError("gap_vox must be an even count >= 2")
    eps_core = _resolve_eps(core)
    lint = physics.interior_wavelength(eps_core)
    delta = lint / vpw
    n_abs = round(absorber_lint * vpw)
    lead = max(n_abs, fan_len_vox)
    nx = straight_vox + 2 * lead
    hy = gap_vox // 2 + width_vox + fan_offset_vox + outer_margin_vox
    ny = 2 * hy
    nz = height_vox
    grid = VoxelGrid(nx, ny, nz, delta)

    # shift of the lower guide away from the mid-plane, per x column; the
    # staircase is centered at mid-depth of the lead-in
    shift = np.zeros(nx, dtype=int)
    ramp_hi = min(lead, max(lead // 2 + fan_len_vox // 2, fan_len_vox))
    ramp_lo = ramp_hi - fan_len_vox
    for i in range(lead):
        if i < ramp_lo:
            s = fan_offset_vox
        elif i < ramp_hi:
            s = round(fan_offset_vox * (ramp_hi - i) / fan_len_vox)
        else:
            s = 0
        shift[i] = s
        shift[nx - 1 - i] = s

    eps = np.ones(grid.shape, dtype=np.complex128)
    for ix in range(nx):
        top = hy - gap_vox // 2 - shift[ix]
        eps[:, top - width_vox : top, ix] = eps_core
    eps = np.where(eps != 1.0, eps, eps[:, ::-1, :])  # mirror upper guide

    pmap = PermittivityMap(grid, eps)
    if n_abs:
        pmap = append_absorber(pmap, "low_x", n_abs, absorber_exponent)
        pmap = append_absorber(pmap, "high_x", n_abs, absorber_exponent)
    boxes = (
        Box("guide_lo", 0, nx, 0, hy, 0, nz),
        Box("guide_hi", 0, nx, hy, ny, 0, nz),
    )
    hint = PartitionHint(
        boxes=boxes, levels={"guide_lo": "one-level", "guide_hi": "one-level"}
    )
    hint.validate(grid)
    return pmap, hint


def dipole_incident(
    grid: VoxelGrid, position, moment, physics: Physics
) -> np.ndarray:
    """Incident field of a point electric dipole at every voxel center.

    Uses the full free-space dyadic kernel (near and far terms) under the
    e^{j omega t} convention; the moment absorbs the 1/eps0 amplitude
    factor. Positions closer than delta/100 to a voxel center are rejected.
    """
    position = np.asarray(position, dtype=float).reshape(3)
    moment = np.asarray(moment, dtype=np.complex128).reshape(3)
    if np.linalg.norm(moment) == 0:
        raise ValueError("dipole moment must be nonzero")
    ox, oy, oz = grid.origin
    dxs = ox + grid.delta * (np.arange(grid.nx) + 0.5) - position[0]
    dys = oy + grid.delta * (np.arange(grid.ny) + 0.5) - position[1]
    dzs = oz + grid.delta * (np.arange(grid.nz) + 0.5) - position[2]
    nearest = np.sqrt(
        np.min(np.abs(dxs)) ** 2 + np.min(np.abs(dys)) ** 2 + np.min(np.abs(dzs)) ** 2
    )
    if nearest < grid.delta / 100.0:
        raise ValueError(
            "dipole position coincides with a voxel center (singular excitation)"
        )
    g = accel.green_tensors(dzs, dys, dxs, physics.k0)
    e = np.empty((3,) + grid.shape, dtype=np.complex128)
    for a in range(3):
        e[a] = (
            g[accel.PAIR_OF[a, 0]] * moment[0]
            + g[accel.PAIR_OF[a, 1]] * moment[1]
            + g[accel.PAIR_OF[a, 2]] * moment[2]
        )
    return e.reshape(-1)


def default_dipole_position(grid: VoxelGrid, standoff: float) -> np.ndarray:
    """Point on the waveguide axis, standoff meters before the low-x face."""
    ox, oy, oz = grid.origin
    return np.array(
        [
            ox - standoff,
            oy + 0.5 * grid.ny * grid.delta,
            oz + 0.5 * grid.nz * grid.delta,
        ]
    )
