"""Config-driven pipeline: build, solve, and write structured outputs.

run() executes one configured solve into a run directory (report.json,
residuals.csv, field.bin/.json, resolved config echo); sweep() expands the
configured parameter axes into one CSV row per Cartesian point, solving
each point once per requested preconditioner variant; validate() executes
the built-in dense-oracle equivalence suite on small instances.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from voxvie import io
from voxvie.circulant import (
    build_blocked,
    build_one_level,
    build_reduced_one_level,
    build_two_level,
    chan_circulant,
    partition_boxes,
    wrap_circulant_x,
    wrap_circulant_xy,
)
from voxvie.config import homog_internal
from voxvie.errors import ConfigError
from voxvie.grid import (
    PermittivityMap,
    Physics,
    dielectric_ratio,
    homogenize,
    medium_coefficient,
)
from voxvie.kernel import assemble_kernel, dense_operator
from voxvie.operator import (
    apply_system,
    field_from_currents,
    plan_operator,
    rhs_from_incident,
)
from voxvie.photonics import (
    build_bragg,
    build_directional_coupler,
    build_disk_resonator,
    build_waveguide,
    default_dipole_position,
    dipole_incident,
)
from voxvie.solver import dense_pinv_matrix, gmres, spectrum


@dataclass
class Problem:
    """Everything needed to run one solve."""

    config: dict
    physics: Physics
    pmap: PermittivityMap
    hint: object
    kernel: object
    plan: object
    m: np.ndarray
    e_inc: np.ndarray
    b: np.ndarray


def _build_device(cfg: dict, physics: Physics):
    dev = cfg["device"]
    kind, geometry = dev["kind"], dev["geometry"]
    common = dict(
        vpw=dev["vpw"],
        absorber_lint=dev["absorber"]["length_lint"],
        absorber_exponent=dev["absorber"]["exponent"],
    )
    if kind == "waveguide":
        length = geometry.get("length_lint", 0.0)
        kwargs = {k: v for k, v in geometry.items() if k != "length_lint"}
        kwargs["cross_lint"] = tuple(kwargs.get("cross_lint", (1.12, 0.56)))
        if "cross_vox" in kwargs:
            kwargs["cross_vox"] = tuple(kwargs["cross_vox"])
        return build_waveguide(length, physics, dev["core"], **common, **kwargs)
    if kind == "bragg":
        return build_bragg(physics, dev["core"], **common, **geometry)
    if kind == "disk":
        geometry = dict(geometry)
        radius = geometry.pop("radius_lint")
        gap = geometry.pop("gap_vox")
        return build_disk_resonator(radius, gap, physics, dev["core"], **common, **geometry)
    if kind == "coupler":
        geometry = dict(geometry)
        straight = geometry.pop("straight_vox")
        return build_directional_coupler(straight, physics, dev["core"], **common, **geometry)
    raise ConfigError(f"unknown device kind {kind!r}")


def build_problem(cfg: dict) -> Problem:
    physics = Physics.from_wavelength(cfg["physics"]["wavelength_nm"] * 1e-9)
    pmap, hint = _build_device(cfg, physics)
    kern = assemble_kernel(pmap.grid, physics.k0, near_gauss=cfg["kernel"]["near_gauss"])
    plan = plan_operator(kern, workers=cfg["threads"])
    m = medium_coefficient(pmap)
    exc = cfg["excitation"]
    if exc["position"] is not None:
        pos = np.asarray(exc["position"], dtype=float)
    else:
        core = cfg["device"]["core"]
        from voxvie.grid import material_permittivity

        eps_core = (
            material_permittivity(core) if isinstance(core, str) else complex(core)
        )
        lint = physics.interior_wavelength(eps_core)
        pos = default_dipole_position(pmap.grid, exc["standoff_lint"] * lint)
        if cfg["device"]["kind"] == "coupler":
            # aim at the lower guide axis instead of the symmetry plane
            g = cfg["device"]["geometry"]
            pos[1] = (
                pmap.grid.ny / 2 - g.get("gap_vox", 2) / 2 - g.get("width_vox", 5) / 2
            ) * pmap.grid.delta
        elif cfg["device"]["kind"] == "disk":
            g = cfg["device"]["geometry"]
            pos[1] = (g.get("bus_width_vox", 5) / 2) * pmap.grid.delta
    e_inc = dipole_incident(pmap.grid, pos, exc["moment"], physics)
    b = rhs_from_incident(m, e_inc, physics)
    return Problem(
        config=cfg,
        physics=physics,
        pmap=pmap,
        hint=hint,
        kernel=kern,
        plan=plan,
        m=m,
        e_inc=e_inc,
        b=b,
    )


def build_preconditioner(problem: Problem, prec_cfg: dict):
    """Returns (apply or None, summary dict, build seconds)."""
    kind = prec_cfg["kind"]
    if kind == "none":
        return None, {"level": "none", "bytes": 0}, 0.0
    cap = int(prec_cfg["cap_mb"] * 2**20)
    strategy = homog_internal(prec_cfg["homogenization"])
    t0 = time.perf_counter()
    if kind == "blocked":
        partition = partition_boxes(problem.pmap.grid, problem.hint.boxes)
        levels = dict(problem.hint.levels)
        if prec_cfg["box_levels"]:
            levels.update(prec_cfg["box_levels"])
        homog_map = {
            label: homog_internal(name)
            for label, name in (prec_cfg["box_homogenization"] or {}).items()
        }
        prec = build_blocked(
            problem.kernel,
            problem.pmap,
            partition,
            levels,
            homog=homog_map,
            reduce_tol=prec_cfg["reduce_tol"],
            cap_bytes=cap,
        )
    else:
        mtilde = homogenize(problem.pmap, strategy)
        if kind == "one-level":
            prec = build_one_level(problem.kernel, mtilde, cap_bytes=cap)
        elif kind == "reduced-one-level":
            prec = build_reduced_one_level(
                problem.kernel, mtilde, prec_cfg["reduce_tol"], cap_bytes=cap
            )
        elif kind == "two-level":
            mode_const = homogenize(problem.pmap, "mode") if strategy != "mode" else mtilde
            prec = build_two_level(problem.kernel, mode_const, cap_bytes=cap)
        else:
            raise ConfigError(f"unknown preconditioner kind {kind!r}")
    build_s = time.perf_counter() - t0
    summary = prec.summary()
    summary["build_seconds"] = build_s
    summary["homogenization"] = prec_cfg["homogenization"]
    return prec.apply, summary, build_s


def solve_problem(problem: Problem, prec_cfg: dict):
    """One preconditioned solve; returns (currents, report, prec summary)."""
    apply_pinv, summary, build_s = build_preconditioner(problem, prec_cfg)
    scfg = problem.config["solver"]
    apply_a = lambda v: apply_system(problem.plan, problem.m, v)
    x, report = gmres(
        apply_a,
        problem.b,
        apply_pinv=apply_pinv,
        tol=scfg["tol"],
        maxit=scfg["maxit"],
        restart=scfg["restart"],
    )
    report.build_seconds = build_s
    report.memory = {
        "kernel_bytes": problem.kernel.storage_bytes(),
        "operator_plan_bytes": problem.plan.storage_bytes(),
        "preconditioner_bytes": int(summary.get("bytes", 0)),
        "krylov_basis_bytes": report.iterations * problem.b.size * 16,
    }
    return x, report, summary


def run(cfg: dict, outdir) -> Path:
    """Execute one configured solve and write the run directory."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    problem = build_problem(cfg)
    w, report, prec_summary = solve_problem(problem, cfg["preconditioner"])
    e_total = field_from_currents(problem.plan, w, problem.e_inc, problem.physics)

    grid = problem.pmap.grid
    io.write_field(outdir / "field.bin", grid, e_total, wavelength=problem.physics.lambda0)
    seconds_per_iter = (
        report.solve_seconds / report.iterations if report.iterations else None
    )
    io.write_residuals(outdir / "residuals.csv", report.residuals, seconds_per_iter)
    full_report = {
        "solve": report.to_dict(),
        "preconditioner": prec_summary,
        "grid": {"dims": list(grid.dims), "delta": grid.delta, "voxels": grid.n_voxels},
        "dielectric_ratio": dielectric_ratio(problem.pmap),
    }
    io.write_report(outdir / "report.json", full_report)
    (outdir / "config.yaml").write_text(yaml.safe_dump(cfg, sort_keys=True))
    return outdir


def _prec_label(prec_cfg: dict) -> str:
    label = prec_cfg["kind"].replace("-", "_")
    if prec_cfg["kind"] in ("one-level", "reduced-one-level"):
        label += "_" + prec_cfg["homogenization"].replace("-", "_")
    return label


def _sweep_point(cfg: dict, names, values, prec_variants):
    point_cfg = {k: v for k, v in cfg.items()}
    geometry = dict(cfg["device"]["geometry"])
    geometry.update(dict(zip(names, values)))
    point_cfg["device"] = dict(cfg["device"], geometry=geometry)
    row: list = list(values)
    try:
        problem = build_problem(point_cfg)
        row.append(f"{dielectric_ratio(problem.pmap):.6f}")
        for prec_cfg in prec_variants:
            _, report, summary = solve_problem(problem, prec_cfg)
            row += [
                report.iterations,
                report.converged,
                f"{report.build_seconds:.3f}",
                f"{report.solve_seconds:.3f}",
                int(summary.get("bytes", 0)),
            ]
        error = ""
    except Exception as exc:  # sweep must continue on per-point failures
        error = f"{type(exc).__name__}: {exc}"
        want = 1 + 5 * len(prec_variants)
        row += [""] * (want - (len(row) - len(values)))
    row.append(error)
    return row


def sweep(cfg: dict, outdir) -> Path:
    """Cartesian sweep over configured axes; one CSV row per grid point."""
    if not cfg.get("sweep"):
        raise ConfigError("config has no sweep section")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    axes = cfg["sweep"]["axes"]
    prec_variants = cfg["sweep"]["preconditioners"]
    names = list(axes)
    header = list(names) + ["dielectric_ratio"]
    for prec_cfg in prec_variants:
        tag = _prec_label(prec_cfg)
        header += [
            f"iterations_{tag}",
            f"converged_{tag}",
            f"build_s_{tag}",
            f"solve_s_{tag}",
            f"prec_bytes_{tag}",
        ]
    header.append("error")

    points = list(itertools.product(*axes.values()))
    workers = cfg["threads"]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(
                pool.map(lambda v: _sweep_point(cfg, names, v, prec_variants), points)
            )
    else:
        rows = [_sweep_point(cfg, names, v, prec_variants) for v in points]
    path = outdir / "sweep.csv"
    io.write_csv(path, header, rows)
    (outdir / "config.yaml").write_text(yaml.safe_dump(cfg, sort_keys=True))
    return path


def spectrum_run(cfg: dict, outdir) -> Path:
    """Dense spectra of the configured (small) problem, with and without prec."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    problem = build_problem(cfg)
    a = dense_operator(problem.kernel, problem.m)
    ev_un = spectrum(a)
    header = ["re_unprec", "im_unprec"]
    cols = [ev_un.real, ev_un.imag]
    if cfg["preconditioner"]["kind"] != "none":
        apply_pinv, _, _ = build_preconditioner(problem, cfg["preconditioner"])

        class _Prec:
            apply = staticmethod(apply_pinv)

        pinv = dense_pinv_matrix(_Prec, problem.pmap.grid.n_unknowns)
        ev_p = spectrum(a, pinv)
        header += ["re_prec", "im_prec"]
        cols += [ev_p.real, ev_p.imag]
    rows = [[f"{c[i]:.16e}" for c in cols] for i in range(len(ev_un))]
    path = outdir / "spectrum.csv"
    io.write_csv(path, header, rows)
    return path


# ---------------------------------------------------------------------------
# Built-in oracle validation suite
# ---------------------------------------------------------------------------


def validate(inject_fault: str | None = None) -> dict:
    """Dense-oracle equivalence checks on built-in small instances.

    Returns {"passed": bool, "checks": [(name, ok, detail), ...]}. The
    inject_fault hook deliberately corrupts an input ("parity") as a
    negative control; the corresponding check must then fail.
    """
    rng = np.random.default_rng(7)
    checks: list[tuple[str, bool, str]] = []

    def record(name, ok, detail=""):
        checks.append((name, bool(ok), detail))

    k0 = 2 * np.pi
    from voxvie.grid import VoxelGrid

    grid = VoxelGrid(4, 3, 2, 0.05)
    kern = assemble_kernel(grid, k0)
    tensors = kern.tensors
    if inject_fault == "parity":
        tensors = tensors.copy()
        tensors[1, 0, 0, 0] *= -1.0  # break g_xy odd parity at one offset
        from voxvie.kernel import ToeplitzKernel

        kern = ToeplitzKernel(grid=grid, k0=k0, tensors=tensors)
    elif inject_fault is not None:
        raise ValueError(f"unknown fault {inject_fault!r}")

    # kernel parity: g_xy odd under sign flip of dx or dy
    gxy = kern.tensors[1]
    parity_err = float(
        max(
            np.abs(gxy + gxy[:, :, ::-1]).max(),
            np.abs(gxy + gxy[:, ::-1, :]).max(),
        )
    )
    scale = float(np.abs(gxy).max())
    record("kernel parity", parity_err <= 1e-13 * max(scale, 1e-300), f"err={parity_err:.2e}")

    # complex symmetry of the dense reconstruction
    from voxvie.kernel import dense_n

    n_dense = dense_n(kern)
    sym = float(np.abs(n_dense - n_dense.T).max() / np.abs(n_dense).max())
    record("dense symmetry", sym < 1e-13, f"rel={sym:.2e}")

    # FFT apply vs dense oracle on random complex permittivity
    eps = rng.uniform(1.2, 3.0, grid.shape) - 1j * rng.uniform(0, 0.3, grid.shape)
    m = medium_coefficient(PermittivityMap(grid, eps))
    a = dense_operator(kern, m)
    plan = plan_operator(kern)
    x = rng.normal(size=grid.n_unknowns) + 1j * rng.normal(size=grid.n_unknowns)
    err = np.linalg.norm(apply_system(plan, m, x) - a @ x) / np.linalg.norm(a @ x)
    record("fft apply vs dense", err < 1e-12, f"rel={err:.2e}")

    # Chan circulant: hand case and Frobenius projection
    hand = chan_circulant([1, 2, 3], [1, -1, -2]).c
    record(
        "chan hand case",
        np.allclose(hand, [1.0, 2.0 / 3.0, 1.0 / 3.0], atol=1e-14),
        str(hand.real),
    )

    # exactness on an x-circulant operator
    wrapped = wrap_circulant_x(kern)
    m_h = np.full(grid.shape, 0.6 + 0.05j)
    aw = dense_operator(wrapped, m_h)
    prec = build_one_level(wrapped, m_h)
    res = float(np.abs(aw @ prec.apply(x) - x).max() / np.abs(x).max())
    record("1-level exact inverse", res < 1e-10, f"rel={res:.2e}")

    wrapped2 = wrap_circulant_xy(kern)
    aw2 = dense_operator(wrapped2, m_h)
    prec2 = build_two_level(wrapped2, m_h)
    res2 = float(np.abs(aw2 @ prec2.apply(x) - x).max() / np.abs(x).max())
    record("2-level exact inverse", res2 < 1e-10, f"rel={res2:.2e}")

    # GMRES vs dense direct solve
    b = rng.normal(size=grid.n_unknowns) + 1j * rng.normal(size=grid.n_unknowns)
    xg, rep = gmres(lambda v: a @ v, b, tol=1e-10, maxit=200)
    xd = np.linalg.solve(a, b)
    gerr = np.linalg.norm(xg - xd) / np.linalg.norm(xd)
    record("gmres vs direct", rep.converged and gerr < 1e-8, f"rel={gerr:.2e}")

    return {"passed": all(ok for _, ok, _ in checks), "checks": checks}
