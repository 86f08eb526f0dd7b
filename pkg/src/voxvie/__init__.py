"""Voxel volume-integral-equation solver with circulant preconditioning.

The package simulates time-harmonic electromagnetic scattering by dielectric
silicon-photonics structures on a uniform voxel grid. The discretized system
(I - M N) w = j*omega*eps0 * M e_inc is applied matrix-free through FFTs and
solved with GMRES, optionally preconditioned by a suite of multilevel
circulant approximations (1-level, reduced 1-level, 2-level, and blocked).
"""

from voxvie.grid import MATERIALS, PermittivityMap, Physics, VoxelGrid
from voxvie.kernel import ToeplitzKernel, assemble_kernel
from voxvie.operator import apply_system, plan_operator
from voxvie.solver import SolveReport, gmres

__version__ = "0.1.0"

__all__ = [
    "MATERIALS",
    "PermittivityMap",
    "Physics",
    "SolveReport",
    "ToeplitzKernel",
    "VoxelGrid",
    "apply_system",
    "assemble_kernel",
    "gmres",
    "plan_operator",
    "__version__",
]
