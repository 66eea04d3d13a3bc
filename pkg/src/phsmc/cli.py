"""Command-line entry point: ``phsmc run|validate|enumerate|km``.

Exit codes: 0 success, 1 runtime failure, 2 invalid config or arguments.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .harness import (
    DEFAULT_OUT_DIR,
    OUT_DIR_ENV,
    PRESETS,
    ConfigError,
    enumerate_experiment,
    load_config,
    run_experiment,
    validate_config,
)
from .samplers import SamplerRuntimeError
from .survival.km import DEFAULT_TIMES, kaplan_meier

log = logging.getLogger("phsmc")


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", type=Path, help="JSON config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--iters", type=int, help="override the number of iterations")
    p.add_argument("--out-dir", type=Path, help=f"output directory (default: ${OUT_DIR_ENV}/<preset>)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phsmc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment and export its trace and report")
    _add_overrides(p)

    p = sub.add_parser("validate", help="check a config without running it")
    _add_overrides(p)

    p = sub.add_parser("enumerate", help="exact posterior of a small linreg or tree instance")
    _add_overrides(p)
    p.add_argument("--max-leaves", type=int, help="largest tree size to enumerate (default: b_max)")

    p = sub.add_parser("km", help="Kaplan-Meier estimate from a CSV of times and event flags")
    p.add_argument("csv", type=Path)
    p.add_argument("--time-col", default="time")
    p.add_argument("--event-col", default="event")
    p.add_argument("--at", type=float, nargs="+", default=list(DEFAULT_TIMES), help="evaluation times")
    p.add_argument("--out-dir", type=Path, help="also write km.csv here")

    sub.add_parser("presets", help="list the shipped presets")
    return parser


def _load(args):
    return load_config(args.config, seed=args.seed, n_iter=args.iters, out_dir=args.out_dir)


def _report_config_error(path: Path, exc: ConfigError) -> int:
    for issue in exc.issues:
        print(f"{path}: {issue}", file=sys.stderr)
    return 2


def _cmd_run(args) -> int:
    try:
        cfg = _load(args)
    except ConfigError as exc:
        return _report_config_error(args.config, exc)
    try:
        report = run_experiment(cfg)
    except SamplerRuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary = {"out_dir": str(cfg.out_dir), "swap_rate": report.swap_rate, "acceptance_rates": report.acceptance_rates}
    if report.inclusion_probabilities is not None:
        summary["inclusion_probabilities"] = report.inclusion_probabilities
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_validate(args) -> int:
    issues = validate_config(args.config, seed=args.seed, n_iter=args.iters, out_dir=args.out_dir)
    if issues:
        return _report_config_error(args.config, ConfigError(issues))
    print(f"{args.config}: ok")
    return 0


def _cmd_enumerate(args) -> int:
    try:
        cfg = _load(args)
    except ConfigError as exc:
        return _report_config_error(args.config, exc)
    try:
        result = enumerate_experiment(cfg, max_leaves=args.max_leaves)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    key = "inclusion_probabilities" if result["kind"] == "linreg" else "covariate_inclusion"
    print(json.dumps({"out_dir": str(cfg.out_dir), key: result[key]}, indent=2))
    return 0


def _cmd_km(args) -> int:
    try:
        with open(args.csv, newline="") as fh:
            reader = csv.DictReader(fh)
            times, events = [], []
            for line, row in enumerate(reader, start=2):
                try:
                    t = float(row[args.time_col])
                    e = int(row[args.event_col])
                except KeyError as exc:
                    print(f"{args.csv}: missing column {exc}", file=sys.stderr)
                    return 2
                except (TypeError, ValueError):
                    print(f"{args.csv}:{line}: malformed time or event value", file=sys.stderr)
                    return 2
                if t <= 0 or e not in (0, 1):
                    print(f"{args.csv}:{line}: time must be positive and event 0 or 1", file=sys.stderr)
                    return 2
                times.append(t)
                events.append(e)
    except OSError as exc:
        print(f"{args.csv}: {exc.strerror}", file=sys.stderr)
        return 2
    if not times:
        print(f"{args.csv}: no data rows", file=sys.stderr)
        return 2
    surv = kaplan_meier(times, events, args.at)
    rows = [{"time": t, "survival": float(s)} for t, s in zip(args.at, surv)]
    out_dir = args.out_dir or (Path(os.environ[OUT_DIR_ENV]) if OUT_DIR_ENV in os.environ else None)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "km.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["time", "survival"])
            w.writeheader()
            w.writerows({"time": repr(r["time"]), "survival": repr(r["survival"])} for r in rows)
    for r in rows:
        print(f"S({r['time']:g}) = {r['survival']:.4f}")
    return 0


def _cmd_presets(args) -> int:
    for name in sorted(PRESETS):
        p = PRESETS[name]
        s = p["sampler"]
        chains = f", M={s['n_chains']}" if "n_chains" in s else ""
        print(f"{name}: {p['target']['kind']} / {s['kind']}{chains}, {p['n_iter']} iterations")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    handler = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "enumerate": _cmd_enumerate,
        "km": _cmd_km,
        "presets": _cmd_presets,
    }[args.command]
    return handler(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
