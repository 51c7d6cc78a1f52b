"""Command-line entry point for the experiment harness.

Subcommands: example1, sweep-symmetric, sweep-asymmetric, sweep-gamp,
trajectory, selftest.  Each experiment writes one CSV plus a manifest with
the resolved configuration and seed into the output directory.  Flags
override config-file values, which override the built-in defaults.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import apply_overrides, default_config, load_config_file
from .experiments import run_experiment, write_manifest
from .records import summarize, write_records
from .selftest import run_selftest

_COMMAND_KINDS = {
    "example1": "example1",
    "sweep-symmetric": "symmetric",
    "sweep-asymmetric": "asymmetric",
    "sweep-gamp": "gamp",
    "trajectory": "trajectory",
}


def _add_experiment_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--frames", type=int, help="frames per optimization run")
    sub.add_argument("--reps", type=int, help="repetitions per sweep value")
    sub.add_argument("--restarts", type=int, help="initial matrices per run")
    sub.add_argument("--gamma", type=float, help="constant step size")
    sub.add_argument("--kappa", type=float, help="weight clip bound")
    sub.add_argument("--sigma-target", type=float, action="append",
                     metavar="SIGMA",
                     help="target-perturbation std (repeatable)")
    sub.add_argument("--sweep", type=str, metavar="V1,V2,...",
                     help="comma-separated sweep values")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--out", type=str, metavar="DIR", help="output directory")
    sub.add_argument("--config", type=str, metavar="FILE",
                     help="flat key=value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alohaopt",
        description="Frame slotted ALOHA slot-allocation experiments")
    commands = parser.add_subparsers(dest="command", required=True)
    for command in _COMMAND_KINDS:
        sub = commands.add_parser(command,
                                  help=f"run the {command} experiment")
        _add_experiment_flags(sub)
    commands.add_parser("selftest", help="run the enumeration-oracle suites")
    return parser


def _flag_overrides(args: argparse.Namespace) -> dict[str, str]:
    overrides: dict[str, str] = {}
    if args.frames is not None:
        overrides["frames"] = str(args.frames)
    if args.reps is not None:
        overrides["repetitions"] = str(args.reps)
    if args.restarts is not None:
        overrides["restarts"] = str(args.restarts)
    if args.gamma is not None:
        overrides["gamma"] = str(args.gamma)
    if args.kappa is not None:
        overrides["kappa"] = str(args.kappa)
    if args.sigma_target:
        overrides["sigma_target_list"] = ",".join(str(s) for s in args.sigma_target)
    if args.sweep is not None:
        overrides["sweep_values"] = args.sweep
    if args.seed is not None:
        overrides["master_seed"] = str(args.seed)
    if args.out is not None:
        overrides["out_dir"] = args.out
    return overrides


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        failures = 0
        for result in run_selftest():
            status = "PASS" if result.passed else "FAIL"
            print(f"{status} {result.name}: {result.detail}")
            failures += 0 if result.passed else 1
        return 1 if failures else 0

    config = default_config(_COMMAND_KINDS[args.command])
    if args.config is not None:
        config = apply_overrides(config, load_config_file(args.config))
    config = apply_overrides(config, _flag_overrides(args))
    config.validate()

    records = run_experiment(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{config.experiment}.csv"
    manifest_path = out_dir / f"{config.experiment}_manifest.txt"
    write_records(csv_path, records)
    write_manifest(config, config.resolve_p(), manifest_path)

    print(f"wrote {len(records)} records to {csv_path}")
    print(f"wrote manifest to {manifest_path}")
    print(f"{'method':<22} {'sweep':>8} {'mean':>10} {'std':>10}")
    for row in summarize(records):
        print(f"{row.method:<22} {row.sweep_value:>8.3g} "
              f"{row.mean:>10.4f} {row.std:>10.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
