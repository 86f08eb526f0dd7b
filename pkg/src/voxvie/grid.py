"""Voxel lattice, material constants, and medium-coefficient maps.

Array convention used everywhere in the package: per-voxel quantities are
C-ordered ndarrays with axes (z, y, x), shape (nz, ny, nx), so that the x
axis is contiguous. Flattening a (3, nz, ny, nx) field array therefore
yields the canonical unknown ordering

    g = ix + nx*(iy + ny*iz) + component*N,   component in {x: 0, y: 1, z: 2}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.constants as const

# Relative permittivities of common core/cladding combinations at a 1550 nm
# operating wavelength. The "_in_" entries are core permittivities normalized
# by the cladding value so the simulation background stays eps_r = 1.
MATERIALS: dict[str, float] = {
    "air": 1.0,
    "si": 12.1,
    "sin": 3.99,
    "sio2": 2.085,
    "si_in_sio2": 5.80,
    "sin_in_sio2": 1.91,
}


def material_permittivity(name: str) -> complex:
    """Resolve a material name ("si", "sin", "sio2", ...) to its eps_r."""
    try:
        return complex(MATERIALS[name.lower()])
    except KeyError:
        raise ValueError(
            f"unknown material {name!r}; known materials: {sorted(MATERIALS)}"
        ) from None


@dataclass(frozen=True)
class VoxelGrid:
    """Uniform voxel lattice: counts per axis, pitch, and origin corner.

    The voxel with index (ix, iy, iz) has its center at
    origin + delta*(ix + 1/2, iy + 1/2, iz + 1/2).
    """

    nx: int
    ny: int
    nz: int
    delta: float
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError(f"voxel counts must be >= 1, got {self.dims}")
        if not self.delta > 0:
            raise ValueError(f"voxel pitch must be positive, got {self.delta}")
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        if len(self.origin) != 3:
            raise ValueError("origin must be a 3-vector")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def shape(self) -> tuple[int, int, int]:
        """ndarray shape (nz, ny, nx) of per-voxel arrays."""
        return (self.nz, self.ny, self.nx)

    @property
    def n_voxels(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def n_unknowns(self) -> int:
        return 3 * self.n_voxels

    @property
    def voxel_volume(self) -> float:
        return self.delta**3

    def linear_index(self, ix, iy, iz):
        """Canonical voxel index v = ix + nx*(iy + ny*iz)."""
        return ix + self.nx * (iy + self.ny * iz)

    def center(self, ix: int, iy: int, iz: int) -> np.ndarray:
        return np.asarray(self.origin) + self.delta * (
            np.array([ix, iy, iz], dtype=float) + 0.5
        )

    def centers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coordinate arrays (X, Y, Z), each shaped (nz, ny, nx)."""
        ox, oy, oz = self.origin
        x = ox + self.delta * (np.arange(self.nx) + 0.5)
        y = oy + self.delta * (np.arange(self.ny) + 0.5)
        z = oz + self.delta * (np.arange(self.nz) + 0.5)
        Z, Y, X = np.meshgrid(z, y, x, indexing="ij")
        return X, Y, Z


@dataclass(frozen=True)
class Physics:
    """Angular frequency and vacuum constants; k0 = omega*sqrt(eps0*mu0)."""

    omega: float
    eps0: float = const.epsilon_0
    mu0: float = const.mu_0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @classmethod
    def from_wavelength(cls, lambda0: float) -> "Physics":
        """Physics for a free-space operating wavelength in meters."""
        k0 = 2.0 * np.pi / lambda0
        omega = k0 / np.sqrt(const.epsilon_0 * const.mu_0)
        return cls(omega=omega)

    @property
    def k0(self) -> float:
        return self.omega * np.sqrt(self.eps0 * self.mu0)

    @property
    def lambda0(self) -> float:
        return 2.0 * np.pi / self.k0

    def interior_wavelength(self, eps_r: complex) -> float:
        """lambda0 / sqrt(Re eps_r), the wavelength inside a dielectric."""
        return self.lambda0 / np.sqrt(np.real(eps_r))


class PermittivityMap:
    """Per-voxel complex relative permittivity eps_r = eps' - j*eps''.

    Passivity requires eps' > 0 and eps'' >= 0 (stored imaginary part <= 0
    under the e^{j omega t} convention). Air voxels carry eps_r = 1 exactly.
    """

    def __init__(self, grid: VoxelGrid, eps_r: np.ndarray):
        eps_r = np.asarray(eps_r, dtype=np.complex128)
        if eps_r.shape != grid.shape:
            raise ValueError(
                f"eps_r shape {eps_r.shape} does not match grid shape {grid.shape}"
            )
        if not np.all(eps_r.real > 0):
            raise ValueError("eps_r real part must be positive everywhere")
        if np.any(eps_r.imag > 1e-300):
            raise ValueError(
                "eps_r imaginary part must be <= 0 (lossy convention eps' - j*eps'')"
            )
        self.grid = grid
        self.eps_r = eps_r
        self.eps_r.setflags(write=False)

    @classmethod
    def uniform(cls, grid: VoxelGrid, eps_r: complex) -> "PermittivityMap":
        return cls(grid, np.full(grid.shape, eps_r, dtype=np.complex128))


def medium_coefficient(pmap: PermittivityMap) -> np.ndarray:
    """Per-voxel medium coefficient m = (eps_r - 1)/eps_r, shape (nz, ny, nx)."""
    eps = pmap.eps_r
    if np.any(np.abs(eps) == 0):
        raise ValueError("eps_r vanishes at some voxel; medium coefficient undefined")
    return (eps - 1.0) / eps


def dielectric_ratio(pmap: PermittivityMap) -> float:
    """Fraction of voxels that are not air (eps_r != 1)."""
    return float(np.count_nonzero(pmap.eps_r != 1.0)) / pmap.grid.n_voxels


HOMOGENIZE_STRATEGIES = ("mode", "mean_x", "real_mean_x")


def homogenize(pmap: PermittivityMap, strategy: str) -> np.ndarray:
    """Average the medium coefficient into a map constant along the x axis.

    Strategies:
      mode        -- single most frequent m value over all voxels (exact
                     complex equality; ties broken by larger |m|)
      mean_x      -- arithmetic mean of m along x, varying over (y, z)
      real_mean_x -- real part of the mean_x result

    Returns the homogenized coefficient with the full (nz, ny, nx) shape;
    every strategy yields an array constant along the x axis, which is what
    the 1-level circulant construction requires.
    """
    m = medium_coefficient(pmap)
    if strategy == "mode":
        values, counts = np.unique(m.ravel(), return_counts=True)
        top = values[counts == counts.max()]
        mode = top[np.argmax(np.abs(top))]
        return np.full(m.shape, mode, dtype=np.complex128)
    if strategy == "mean_x":
        return np.broadcast_to(m.mean(axis=2, keepdims=True), m.shape).copy()
    if strategy == "real_mean_x":
        mean = m.mean(axis=2, keepdims=True).real.astype(np.complex128)
        return np.broadcast_to(mean, m.shape).copy()
    raise ValueError(
        f"unknown homogenization strategy {strategy!r}; expected one of {HOMOGENIZE_STRATEGIES}"
    )
