"""Command-line entry point.

Subcommands: run, sweep, spectrum, validate. Exit codes: 0 ok, 1 config
error, 2 solver non-convergence, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
import traceback

from voxvie import config as config_mod
from voxvie import harness, io
from voxvie.errors import ConfigError
from voxvie.presets import PRESETS, preset

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NO_CONVERGENCE = 2
EXIT_INTERNAL = 3


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="YAML run configuration")
    p.add_argument(
        "--preset",
        metavar="NAME",
        help=f"built-in configuration, one of: {', '.join(sorted(PRESETS))}",
    )
    p.add_argument("--out", metavar="DIR", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=None, metavar="N")


def _resolve_config(args) -> dict:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("exactly one of --config or --preset is required")
    if args.config:
        cfg = config_mod.load(args.config)
    else:
        try:
            cfg = config_mod.normalize(preset(args.preset))
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    if args.out is not None:
        cfg["output"]["dir"] = args.out
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg["threads"] = args.threads
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxvie",
        description="Voxel volume-integral-equation solver with circulant preconditioning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve a single configuration")
    _add_common(p_run)
    p_sweep = sub.add_parser("sweep", help="parameter sweep to sweep.csv")
    _add_common(p_sweep)
    p_spec = sub.add_parser("spectrum", help="dense spectra (small problems only)")
    _add_common(p_spec)
    p_val = sub.add_parser("validate", help="run the built-in oracle suite")
    p_val.add_argument(
        "--inject-fault",
        choices=["parity"],
        default=None,
        help="deliberately corrupt an input (negative control)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            result = harness.validate(inject_fault=args.inject_fault)
            for name, ok, detail in result["checks"]:
                print(f"[{'PASS' if ok else 'FAIL'}] {name}  {detail}")
            return EXIT_OK if result["passed"] else EXIT_INTERNAL

        cfg = _resolve_config(args)
        outdir = cfg["output"]["dir"]
        if args.command == "run":
            path = harness.run(cfg, outdir)
            report = io.read_report(path / "report.json")
            solve = report["solve"]
            print(
                f"run complete: {solve['iterations']} iterations, "
                f"converged={solve['converged']}, outputs in {path}"
            )
            return EXIT_OK if solve["converged"] else EXIT_NO_CONVERGENCE
        if args.command == "sweep":
            path = harness.sweep(cfg, outdir)
            header, rows = io.read_csv(path)
            print(f"sweep complete: {len(rows)} points -> {path}")
            bad = [r for r in rows if r[-1]]
            if bad:
                print(f"{len(bad)} points failed; see the error column")
            return EXIT_OK
        if args.command == "spectrum":
            path = harness.spectrum_run(cfg, outdir)
            print(f"spectrum written to {path}")
            return EXIT_OK
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
