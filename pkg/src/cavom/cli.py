"""Command-line front end.

    cavom run <experiment> [--preset P] [--set key=val ...] [--out DIR] [--workers N]
    cavom presets
    cavom validate <config.json>

Exit codes: 0 on success, 2 on configuration errors, 3 on compute errors.
The environment variable CAVOM_OUT overrides the default output root.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .experiments import (EXPERIMENT_IDS, ComputeError, ConfigError,
                          ExperimentConfig, config_from_dict, preset_table,
                          run_experiment)


def _parse_set(entries: list[str]) -> dict:
    overrides = {}
    for entry in entries:
        key, sep, raw = entry.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key=value, got {entry!r}")
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def _default_out() -> Path:
    return Path(os.environ.get("CAVOM_OUT", "out"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavom",
        description="Single-atom cavity optomechanics experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named experiment")
    run.add_argument("experiment", choices=EXPERIMENT_IDS)
    run.add_argument("--preset", default=None)
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VAL", help="override a pinned setting")
    run.add_argument("--out", default=None, help="output root directory")
    run.add_argument("--workers", type=int, default=1)

    sub.add_parser("presets", help="list built-in parameter presets")

    val = sub.add_parser("validate", help="validate an experiment config file")
    val.add_argument("config", type=Path)
    return parser


def _cmd_run(args) -> int:
    config = ExperimentConfig(
        experiment=args.experiment,
        preset=args.preset,
        overrides=_parse_set(args.overrides),
        out_dir=Path(args.out) if args.out else _default_out(),
        workers=args.workers)
    manifest = run_experiment(config)
    for item in manifest["outputs"]:
        print(item["path"])
    print(f"done in {manifest['runtime_seconds']} s")
    return 0


def _cmd_presets() -> int:
    rows = preset_table()
    header = f"{'name':<18}{'g0':>10}{'gamma':>8}{'kappa':>8}{'omega_m':>9}" \
             f"{'eta_ld':>8}{'r_zp':>7}  source"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(f"{r['name']:<18}{r['g0']:>10g}{r['gamma']:>8g}{r['kappa']:>8g}"
              f"{r['omega_m']:>9g}{r['eta_ld']:>8.3f}{r['r_zp']:>7.2f}  {r['source']}")
    print("\nall rates in units of 2*pi*MHz; r_zp at the preset's resonant drive")
    return 0


def _cmd_validate(path: Path) -> int:
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"no such config file: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    config_from_dict(data)
    print(f"{path}: OK")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "presets":
            return _cmd_presets()
        if args.command == "validate":
            return _cmd_validate(args.config)
        raise AssertionError("unreachable")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ComputeError as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
