"""
IRS Discrete Beamforming Simulator

Command-line entry point: runs experiments from a config file or a named
preset, validates configs, and prints the discrete-phase power loss.

Exit codes: 0 success, 2 configuration error, 3 search budget or guard
violation, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from harness.report import generate_console_report, write_outputs
from harness.runner import run
from src.config.loader import (
    ConfigError,
    ExperimentConfig,
    apply_overrides,
    get_presets,
    load_experiment,
    load_preset,
)
from src.core.asymptotics import eta, eta_db
from src.core.su_phase import BudgetExceededError
from src.utils.logger import get_tracker, log, log_error, reset_tracker

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irs-sim",
        description="Joint AP precoding and discrete IRS phase-shift optimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="Run an experiment")
    source = run_p.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="Experiment document (YAML or JSON)")
    source.add_argument("--preset", help="Named preset (see `presets`)")
    run_p.add_argument("--seed", type=int, help="Override the experiment seed")
    run_p.add_argument("--trials", type=int, help="Override the trial count")
    run_p.add_argument("--out", help="Output directory")
    run_p.add_argument("--workers", type=int, help="Worker processes")
    run_p.add_argument("--raw", action="store_true", help="Also write the per-trial dump")

    validate_p = sub.add_parser("validate", help="Validate an experiment document")
    validate_p.add_argument("--config", required=True)

    eta_p = sub.add_parser("eta", help="Discrete-phase received power ratio")
    eta_p.add_argument("--bits", required=True, help="Phase resolution in bits, or inf")

    sub.add_parser("schema", help="Print the experiment JSON schema")
    sub.add_parser("presets", help="List the available presets")
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_preset(args.preset) if args.preset else load_experiment(args.config)
    cfg = apply_overrides(cfg, seed=args.seed, trials=args.trials, workers=args.workers, out=args.out)
    if args.raw:
        cfg = apply_overrides(cfg, output={**cfg.output.model_dump(), "raw_dump": True})
    return cfg


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args)
    reset_tracker()
    result = run(cfg)
    paths = write_outputs(result, cfg.output.out_dir, raw_dump=cfg.output.raw_dump)
    print(generate_console_report(result.rows))
    if result.records:
        get_tracker().print_summary()
    for kind, path in paths.items():
        log(f"{kind}: {path}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = load_experiment(args.config)
    log(f"{args.config}: valid {cfg.scenario.value} experiment, {len(cfg.sweep.values)} sweep points")
    return EXIT_OK


def cmd_eta(args: argparse.Namespace) -> int:
    text = args.bits.strip().lower()
    try:
        bits = math.inf if text in {"inf", "infinity", "continuous"} else float(text)
    except ValueError:
        bits = math.nan
    if not bits >= 1 or (math.isfinite(bits) and bits != int(bits)):
        raise ConfigError(f"bits must be an integer >= 1 or inf, got {args.bits}", "bits")
    print(f"eta({args.bits}) = {eta(bits):.6f} ({eta_db(bits):.2f} dB)")
    return EXIT_OK


def cmd_schema(_: argparse.Namespace) -> int:
    print(json.dumps(ExperimentConfig.model_json_schema(), indent=2))
    return EXIT_OK


def cmd_presets(_: argparse.Namespace) -> int:
    for name, doc in sorted(get_presets().items()):
        print(f"{name:18s} {doc['scenario']}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "validate": cmd_validate,
    "eta": cmd_eta,
    "schema": cmd_schema,
    "presets": cmd_presets,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        log_error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except BudgetExceededError as e:
        log_error(f"Search budget exceeded: {e}")
        return EXIT_BUDGET
    except OSError as e:
        log_error(f"I/O error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
