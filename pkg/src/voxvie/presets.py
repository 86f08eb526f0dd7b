"""Desk-scale presets reproducing the convergence studies in minutes.

Each preset is a complete config mapping (see README for the schema);
`voxvie sweep --preset waveguide-length` etc. Geometry is shrunken from the
published studies so a laptop finishes each sweep in minutes while keeping
the qualitative trends: iteration growth with length and permittivity
without preconditioning, flat counts with the 1-level circulant,
homogenization-strategy ordering on the Bragg grating, and near-flat
blocked-circulant counts on the directional coupler.
"""

import copy

_WAVEGUIDE_LENGTH = {
    "device": {
        "kind": "waveguide",
        "core": "si_in_sio2",
        "vpw": 10,
        "cross_vox": [8, 5],
        "length_vox": 64,
    },
    "solver": {"tol": 1e-4, "maxit": 3000},
    "sweep": {
        "axes": {"length_vox": [32, 64, 128]},
        "preconditioners": [
            {"kind": "none"},
            {"kind": "one-level", "homogenization": "real-mean-x"},
            {"kind": "reduced-one-level", "homogenization": "real-mean-x"},
        ],
    },
}

_WAVEGUIDE_PERMITTIVITY = {
    "device": {
        "kind": "waveguide",
        "core": "si_in_sio2",
        "vpw": 10,
        "cross_vox": [8, 5],
        "length_vox": 64,
    },
    "solver": {"tol": 1e-4, "maxit": 3000},
    "preconditioner": {"kind": "none"},
}

_WAVEGUIDE_RUN = {
    "device": {
        "kind": "waveguide",
        "core": "si_in_sio2",
        "vpw": 10,
        "cross_vox": [8, 5],
        "length_vox": 64,
    },
    "solver": {"tol": 1e-4, "maxit": 3000},
    "preconditioner": {"kind": "one-level", "homogenization": "real-mean-x"},
}

_WAVEGUIDE_SPECTRUM = {
    "device": {
        "kind": "waveguide",
        "core": "si",
        "vpw": 10,
        "cross_vox": [6, 4],
        "length_vox": 20,
    },
    "solver": {"tol": 1e-4, "maxit": 3000},
    "preconditioner": {"kind": "one-level", "homogenization": "real-mean-x"},
}

_BRAGG_STRATEGIES = {
    "device": {
        "kind": "bragg",
        "core": "si",
        "vpw": 12,
        "n_per": 12,
        "w_nm": 480.0,
        "dw_nm": 40.0,
        "pitch_nm": 320.0,
        "height_nm": 200.0,
        "delta_nm": 40.0,
        "lead_periods": 1,
        "absorber": {"length_lint": 0.5},
    },
    "solver": {"tol": 1e-4, "maxit": 4000},
    "sweep": {
        "axes": {"dw_nm": [0.0, 40.0, 80.0, 120.0]},
        "preconditioners": [
            {"kind": "none"},
            {"kind": "one-level", "homogenization": "mode"},
            {"kind": "one-level", "homogenization": "mean-x"},
            {"kind": "one-level", "homogenization": "real-mean-x"},
        ],
    },
}

_COUPLER_BLOCKED = {
    "device": {
        "kind": "coupler",
        "core": "si_in_sio2",
        "vpw": 10,
        "width_vox": 10,
        "height_vox": 6,
        "gap_vox": 2,
        "fan_len_vox": 2,
        "fan_offset_vox": 1,
        "outer_margin_vox": 1,
        "straight_vox": 16,
        "absorber": {"length_lint": 2.4, "exponent": 2.0},
    },
    "solver": {"tol": 1e-4, "maxit": 4000},
    "sweep": {
        "axes": {"straight_vox": [8, 16, 32]},
        "preconditioners": [
            {"kind": "none"},
            {
                "kind": "blocked",
                "box_homogenization": {"guide_lo": "mean-x", "guide_hi": "mean-x"},
            },
        ],
    },
}

_DISK_BLOCKED = {
    "device": {
        "kind": "disk",
        "core": "si",
        "vpw": 10,
        "radius_lint": 0.8,
        "gap_vox": 2,
        "bus_width_vox": 5,
        "height_vox": 3,
        "bus_extra_lint": 0.5,
        "absorber": {"length_lint": 0.5},
    },
    "solver": {"tol": 1e-4, "maxit": 4000},
    "preconditioner": {"kind": "blocked"},
}

PRESETS = {
    "waveguide-run": _WAVEGUIDE_RUN,
    "waveguide-length": _WAVEGUIDE_LENGTH,
    "waveguide-permittivity": _WAVEGUIDE_PERMITTIVITY,
    "waveguide-spectrum": _WAVEGUIDE_SPECTRUM,
    "bragg-strategies": _BRAGG_STRATEGIES,
    "coupler-blocked": _COUPLER_BLOCKED,
    "disk-blocked": _DISK_BLOCKED,
}


def preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        ) from None
