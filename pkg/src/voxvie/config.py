"""Run configuration: YAML loading, strict validation, defaulting.

The schema is a nested map; unknown keys anywhere are errors (fail fast on
typos). See README for the documented schema and the shipped presets.
"""

from __future__ import annotations

import numbers
from pathlib import Path

import yaml

from voxvie.errors import ConfigError
from voxvie.grid import MATERIALS

PREC_KINDS = ("none", "one-level", "reduced-one-level", "two-level", "blocked")
HOMOG_NAMES = ("mode", "mean-x", "real-mean-x")
DEVICE_KINDS = ("waveguide", "bragg", "disk", "coupler")

_DEVICE_GEOMETRY_KEYS = {
    "waveguide": {
        "length_lint",
        "length_vox",
        "cross_lint",
        "cross_vox",
        "clad_margin",
    },
    "bragg": {
        "n_per",
        "w_nm",
        "dw_nm",
        "pitch_nm",
        "height_nm",
        "delta_nm",
        "lead_periods",
        "clad_margin",
    },
    "disk": {
        "radius_lint",
        "gap_vox",
        "bus_width_vox",
        "height_vox",
        "bus_extra_lint",
    },
    "coupler": {
        "straight_vox",
        "width_vox",
        "height_vox",
        "gap_vox",
        "fan_len_vox",
        "fan_offset_vox",
        "outer_margin_vox",
    },
}

_DEFAULTS = {
    "physics": {"wavelength_nm": 1550.0},
    "excitation": {"standoff_lint": 0.5, "moment": [0.0, 1.0, 0.0], "position": None},
    "preconditioner": {
        "kind": "none",
        "homogenization": "real-mean-x",
        "reduce_tol": 1e-3,
        "cap_mb": 2048,
        "box_levels": None,
        "box_homogenization": None,
    },
    "solver": {"tol": 1e-4, "maxit": 2000, "restart": None},
    "kernel": {"near_gauss": False},
    "output": {"dir": "out"},
    "threads": 1,
}


def homog_internal(name: str) -> str:
    if name not in HOMOG_NAMES:
        raise ConfigError(f"unknown homogenization {name!r}; expected one of {HOMOG_NAMES}")
    return name.replace("-", "_")


def _require_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _check_number(value, where: str, positive=False):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{where} must be positive, got {value}")


def _validate_core(value, where: str):
    if isinstance(value, str):
        if value.lower() not in MATERIALS:
            raise ConfigError(
                f"{where}: unknown material {value!r}; known: {sorted(MATERIALS)}"
            )
    else:
        _check_number(value, where, positive=True)


def _validate_prec(section: dict, where: str) -> dict:
    if isinstance(section, str):
        section = {"kind": section}
    merged = dict(_DEFAULTS["preconditioner"])
    _require_keys(section, set(merged), where)
    merged.update(section)
    if merged["kind"] not in PREC_KINDS:
        raise ConfigError(
            f"{where}.kind {merged['kind']!r} not one of {PREC_KINDS}"
        )
    homog_internal(merged["homogenization"])
    _check_number(merged["reduce_tol"], f"{where}.reduce_tol")
    if not 0.0 <= merged["reduce_tol"] <= 1.0:
        raise ConfigError(f"{where}.reduce_tol must lie in [0, 1]")
    for key in ("box_levels", "box_homogenization"):
        if merged[key] is not None and not isinstance(merged[key], dict):
            raise ConfigError(f"{where}.{key} must be a mapping of box label to value")
    return merged


def normalize(raw: dict) -> dict:
    """Validate a raw config mapping and fill in every default."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    top_allowed = {"device", "physics", "excitation", "preconditioner", "solver",
                   "kernel", "output", "sweep", "threads"}
    _require_keys(raw, top_allowed, "config")
    if "device" not in raw:
        raise ConfigError("config must define exactly one device")
    cfg = {}

    device = dict(raw["device"])
    kind = device.pop("kind", None)
    if kind not in DEVICE_KINDS:
        raise ConfigError(f"device.kind must be one of {DEVICE_KINDS}, got {kind!r}")
    common = {"core", "vpw", "absorber"}
    _require_keys(device, _DEVICE_GEOMETRY_KEYS[kind] | common, f"device({kind})")
    core = device.get("core", "si_in_sio2")
    _validate_core(core, "device.core")
    vpw = device.get("vpw", 20)
    _check_number(vpw, "device.vpw", positive=True)
    if vpw < 10:
        raise ConfigError(f"device.vpw must be >= 10, got {vpw}")
    absorber = device.get("absorber") or {}
    _require_keys(absorber, {"length_lint", "exponent", "max_imag"}, "device.absorber")
    absorber = {
        "length_lint": absorber.get("length_lint", 0.0),
        "exponent": absorber.get("exponent", 3.0),
        "max_imag": absorber.get("max_imag"),
    }
    geometry = {
        k: v for k, v in device.items() if k not in ("core", "vpw", "absorber")
    }
    cfg["device"] = {
        "kind": kind,
        "core": core,
        "vpw": vpw,
        "absorber": absorber,
        "geometry": geometry,
    }

    for section in ("physics", "excitation", "solver", "kernel", "output"):
        merged = dict(_DEFAULTS[section])
        given = raw.get(section) or {}
        _require_keys(given, set(merged), section)
        merged.update(given)
        cfg[section] = merged
    _check_number(cfg["physics"]["wavelength_nm"], "physics.wavelength_nm", positive=True)
    _check_number(cfg["solver"]["tol"], "solver.tol", positive=True)
    if not isinstance(cfg["solver"]["maxit"], int) or cfg["solver"]["maxit"] < 1:
        raise ConfigError("solver.maxit must be a positive integer")

    cfg["preconditioner"] = _validate_prec(
        raw.get("preconditioner") or {}, "preconditioner"
    )

    threads = raw.get("threads", _DEFAULTS["threads"])
    if not isinstance(threads, int) or threads < 1:
        raise ConfigError("threads must be a positive integer")
    cfg["threads"] = threads

    sweep = raw.get("sweep")
    if sweep is not None:
        _require_keys(sweep, {"axes", "preconditioners"}, "sweep")
        axes = sweep.get("axes") or {}
        if not axes:
            raise ConfigError("sweep.axes must name at least one parameter")
        geom_keys = _DEVICE_GEOMETRY_KEYS[kind]
        for name, values in axes.items():
            if name not in geom_keys:
                raise ConfigError(
                    f"sweep axis {name!r} is not a {kind} geometry parameter "
                    f"(allowed: {sorted(geom_keys)})"
                )
            if not isinstance(values, (list, tuple)) or not values:
                raise ConfigError(f"sweep axis {name!r} needs a non-empty value list")
        precs = sweep.get("preconditioners")
        if precs is None:
            precs = [raw.get("preconditioner") or {}]
        cfg["sweep"] = {
            "axes": {k: list(v) for k, v in axes.items()},
            "preconditioners": [
                _validate_prec(p, f"sweep.preconditioners[{i}]")
                for i, p in enumerate(precs)
            ],
        }
    else:
        cfg["sweep"] = None
    return cfg


def load(path) -> dict:
    """Load and normalize a YAML config file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return normalize(raw or {})
