"""Command line interface: run, sweep, and rate-fit subcommands.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import ConfigError, ExperimentConfig, run_experiment, sweep
from .metrics import fit_loglog_slope


def _parse_seeds(text: str) -> list[int]:
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ConfigError(f"cannot parse seeds from {text!r}")
    return seeds


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config)
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    if args.seeds is not None:
        cfg.seeds = _parse_seeds(args.seeds)
    if args.mode is not None:
        cfg.solver["mode"] = args.mode
    if args.scale is not None:
        cfg.solver["scale"] = args.scale
        if args.mode is None:
            cfg.solver["mode"] = "practical"
    if args.zero_wallclock:
        cfg.zero_wallclock = True
    cfg.validate()
    return cfg


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", help="path to a JSON experiment config")
    parser.add_argument("--output-dir", default=None)
    parser.add_argument("--seeds", default=None, help="comma list and/or ranges, e.g. 0,1,4-7")
    parser.add_argument("--mode", choices=["theory", "practical"], default=None)
    parser.add_argument("--scale", type=float, default=None, help="practical-mode epoch-length scale")
    parser.add_argument("--zero-wallclock", action="store_true", help="zero wallclock_ns in outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epochsaddle", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="run a config across values of one numeric field")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", required=True, help="dotted config path, e.g. problem.sigma")
    p_sweep.add_argument("--values", required=True, help="comma-separated numeric values")

    p_fit = sub.add_parser("rate-fit", help="fit a log-log rate from a summary.json")
    p_fit.add_argument("summary", help="path to a summary.json with by_target points")
    return parser


def _cmd_run(args) -> int:
    summary = run_experiment(_load_config(args))
    print(f"summary written to {summary.path}")
    if not summary.ok:
        failures = [r for r in summary.payload["runs"] if r["error"] is not None]
        print(f"{len(failures)} run(s) failed; first error: {failures[0]['error']}", file=sys.stderr)
        return 2
    return 0


def _cmd_sweep(args) -> int:
    values = [float(v) for v in args.values.split(",") if v.strip()]
    summaries = sweep(_load_config(args), args.axis, values)
    print(f"{len(summaries)} sweep summaries written under {Path(summaries[0].path).parent.parent}")
    return 0 if all(s.ok for s in summaries) else 2


def _cmd_rate_fit(args) -> int:
    try:
        payload = json.loads(Path(args.summary).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read summary {args.summary}: {exc}") from exc
    targets = payload.get("by_target") or []
    points = [
        (t["total_iterations"], t["median_final_gap"])
        for t in targets
        if t.get("total_iterations") and t.get("median_final_gap")
    ]
    if len(points) < 3:
        raise ConfigError("summary has fewer than 3 usable (budget, gap) points")
    slope, intercept, r2 = fit_loglog_slope(points)
    print(json.dumps({"slope": slope, "intercept": intercept, "r2": r2, "n_points": len(points)}))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "rate-fit":
            return _cmd_rate_fit(args)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
