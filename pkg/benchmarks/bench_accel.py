#!/usr/bin/env python3
"""Benchmark the jitted hot kernels against their pure-numpy fallbacks.

Times the Green-tensor grid evaluation and the dense block unfolds on
preconditioner-build-sized inputs. The numpy path is what you get with
VOXVIE_NO_NUMBA=1; both paths produce identical arrays (asserted here).

Usage:
    python benchmarks/bench_accel.py [--nx 96] [--ny 24] [--nz 12] [--reps 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from voxvie import accel


def best_of(reps, fn, *args):
    best = float("inf")
    out = None
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nx", type=int, default=96)
    ap.add_argument("--ny", type=int, default=24)
    ap.add_argument("--nz", type=int, default=12)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()

    if not accel.HAVE_NUMBA:
        print("numba unavailable (or disabled); nothing to compare")
        return

    nx, ny, nz = args.nx, args.ny, args.nz
    delta = 1.0 / 20
    k0 = 2 * np.pi
    dx = delta * np.arange(-(nx - 1), nx)
    dy = delta * np.arange(-(ny - 1), ny)
    dz = delta * np.arange(-(nz - 1), nz)

    rows = []

    # warm the JIT before timing
    accel._green_tensors_jit(dz[:3], dy[:3], dx[:3], k0)
    t_jit, g_jit = best_of(args.reps, accel._green_tensors_jit, dz, dy, dx, k0)
    t_np, g_np = best_of(args.reps, accel.green_tensors_numpy, dz, dy, dx, k0)
    assert np.allclose(g_jit, g_np, rtol=1e-13, atol=0.0, equal_nan=False)
    rows.append(("green_tensors", g_np[0].size, t_np, t_jit))

    rng = np.random.default_rng(0)
    lam = rng.normal(size=(6, 2 * nz - 1, 2 * ny - 1)) + 1j * rng.normal(
        size=(6, 2 * nz - 1, 2 * ny - 1)
    )
    m_yz = rng.normal(size=(nz, ny)) + 1j * rng.normal(size=(nz, ny))
    accel._unfold_block_yz_jit(lam, m_yz, accel.PAIR_OF)
    t_jit, b_jit = best_of(
        args.reps, accel._unfold_block_yz_jit, lam, m_yz, accel.PAIR_OF
    )
    t_np, b_np = best_of(args.reps, accel.unfold_block_yz_numpy, lam, m_yz)
    assert np.allclose(b_jit, b_np, rtol=1e-12, atol=0.0)
    rows.append(("unfold_block_yz", b_np.size, t_np, t_jit))

    lam_z = rng.normal(size=(6, 2 * nz - 1)) + 1j * rng.normal(size=(6, 2 * nz - 1))
    m_z = rng.normal(size=nz) + 1j * rng.normal(size=nz)
    accel._unfold_block_z_jit(lam_z, m_z, accel.PAIR_OF)
    t_jit, c_jit = best_of(args.reps, accel._unfold_block_z_jit, lam_z, m_z, accel.PAIR_OF)
    t_np, c_np = best_of(args.reps, accel.unfold_block_z_numpy, lam_z, m_z)
    assert np.allclose(c_jit, c_np, rtol=1e-12, atol=0.0)
    rows.append(("unfold_block_z", c_np.size, t_np, t_jit))

    print(f"{'kernel':<18}{'out elems':>10}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>9}")
    for name, n, t_numpy, t_numba in rows:
        print(
            f"{name:<18}{n:>10}{1e3 * t_numpy:>12.2f}{1e3 * t_numba:>12.2f}"
            f"{t_numpy / t_numba:>9.2f}"
        )


if __name__ == "__main__":
    main()
