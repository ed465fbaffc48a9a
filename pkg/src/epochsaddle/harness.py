"""Experiment harness: configs, seeded runs, sweeps, CSV/JSON emission.

A config plus the package version determines every output byte (with the
wallclock-zeroing flag set): runs are seeded with a named counter-based
generator (numpy Philox), workers only parallelize independent seeds, and
all aggregation is sorted before emission.
"""

from __future__ import annotations

import copy
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import Constant, InvSqrt, default_step_rule, run_pdsgd
from .problems import (
    SaddleProblem,
    initial_gap,
    make_dro_scsc,
    make_phase_retrieval_wcsc,
    make_quadratic_scsc,
)
from .scsc import run_epoch_gda_scsc, theory_schedule
from .sets import Ball, WholeSpace, as_point
from .trace import CSV_HEADER, Trace
from .wcsc import WcscConfig, run_epoch_gda_wcsc

SUMMARY_VERSION = 1

_PROBLEM_NAMES = ("quadratic_scsc", "dro_scsc", "phase_retrieval_wcsc")
_SOLVER_KINDS = ("epoch_gda_scsc", "epoch_gda_wcsc", "pdsgd")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    """One experiment: a testbed, a solver, seeds, and output settings.

    ``eps_targets`` (SCSC solvers only) expands the experiment into one
    run per (target, seed); each target gets its own schedule and the
    summary fits a log-log rate over the per-target medians when at least
    three budget points exist.
    """

    problem: dict
    solver: dict
    seeds: list[int]
    output_dir: str
    eps_targets: list[float] | None = None
    start: dict | None = None
    zero_wallclock: bool = False
    workers: int = 1

    _KEYS = ("problem", "solver", "seeds", "output_dir", "eps_targets", "start", "zero_wallclock", "workers")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - set(cls._KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("problem", "solver", "seeds", "output_dir"):
            if key not in raw:
                raise ConfigError(f"config is missing required key {key!r}")
        cfg = cls(
            problem=dict(raw["problem"]),
            solver=dict(raw["solver"]),
            seeds=list(raw["seeds"]),
            output_dir=str(raw["output_dir"]),
            eps_targets=None if raw.get("eps_targets") is None else [float(v) for v in raw["eps_targets"]],
            start=None if raw.get("start") is None else dict(raw["start"]),
            zero_wallclock=bool(raw.get("zero_wallclock", False)),
            workers=int(raw.get("workers", 1)),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "solver": self.solver,
            "seeds": self.seeds,
            "output_dir": self.output_dir,
            "eps_targets": self.eps_targets,
            "start": self.start,
            "zero_wallclock": self.zero_wallclock,
            "workers": self.workers,
        }

    def validate(self) -> None:
        name = self.problem.get("name")
        if name not in _PROBLEM_NAMES:
            raise ConfigError(f"unknown problem name {name!r}; expected one of {_PROBLEM_NAMES}")
        kind = self.solver.get("kind")
        if kind not in _SOLVER_KINDS:
            raise ConfigError(f"unknown solver kind {kind!r}; expected one of {_SOLVER_KINDS}")
        if not self.seeds:
            raise ConfigError("seeds must be a nonempty list of integers")
        if any(int(s) != s for s in self.seeds):
            raise ConfigError("seeds must be integers")
        self.seeds = [int(s) for s in self.seeds]
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.eps_targets is not None:
            if kind == "epoch_gda_wcsc":
                raise ConfigError("eps_targets apply to SCSC solver families only")
            if len(self.eps_targets) == 0:
                raise ConfigError("eps_targets must be nonempty when present")
            if any(v <= 0 for v in self.eps_targets):
                raise ConfigError("eps_targets must be positive")
        if kind == "epoch_gda_scsc" and self.eps_targets is None and "eps" not in self.solver:
            raise ConfigError("epoch_gda_scsc needs solver.eps or eps_targets")
        if kind == "epoch_gda_wcsc" and "epochs" not in self.solver:
            raise ConfigError("epoch_gda_wcsc needs solver.epochs")
        if kind == "pdsgd" and self.eps_targets is None and "iterations" not in self.solver:
            raise ConfigError("pdsgd needs solver.iterations or eps_targets")


def build_problem(spec: dict) -> SaddleProblem:
    """Instantiate a testbed from its serializable description."""
    spec = dict(spec)
    name = spec.pop("name", None)
    data_seed = int(spec.pop("data_seed", 0))
    try:
        if name == "quadratic_scsc":
            dim_x = int(spec.pop("dim_x"))
            dim_y = int(spec.pop("dim_y", dim_x))
            mu = float(spec.pop("mu", 1.0))
            lam = float(spec.pop("lam", 1.0))
            sigma = float(spec.pop("sigma", 0.0))
            coupling_scale = float(spec.pop("coupling_scale", 0.0))
            b_scale = float(spec.pop("b_scale", 0.0))
            c_scale = float(spec.pop("c_scale", 0.0))
            set_radius = spec.pop("set_radius", None)
            bound_radius = float(spec.pop("bound_radius", 10.0))
            if spec:
                raise ConfigError(f"unknown quadratic_scsc fields: {sorted(spec)}")
            coupling = None
            if coupling_scale != 0.0:
                rng = np.random.Generator(np.random.Philox(data_seed))
                raw = rng.standard_normal((dim_x, dim_y))
                coupling = coupling_scale * raw / np.linalg.norm(raw, 2)
            # nonzero linear terms with |b| = b_scale; large values push the
            # saddle onto the feasible-set boundary
            b = b_scale * np.ones(dim_x) / math.sqrt(dim_x) if b_scale else None
            c = c_scale * np.ones(dim_y) / math.sqrt(dim_y) if c_scale else None
            set_x = WholeSpace(dim_x) if set_radius is None else Ball(np.zeros(dim_x), float(set_radius))
            set_y = WholeSpace(dim_y) if set_radius is None else Ball(np.zeros(dim_y), float(set_radius))
            return make_quadratic_scsc(
                dim_x, dim_y, mu, lam, coupling=coupling, b=b, c=c, sigma=sigma,
                set_x=set_x, set_y=set_y, bound_radius=bound_radius,
            )
        if name == "dro_scsc":
            return make_dro_scsc(
                int(spec.pop("n_losses")),
                int(spec.pop("dim_x")),
                float(spec.pop("mu", 1.0)),
                float(spec.pop("lam", 1.0)),
                sigma=float(spec.pop("sigma", 0.0)),
                radius_x=None if spec.get("radius_x") is None else float(spec.pop("radius_x")),
                data_seed=data_seed,
            )
        if name == "phase_retrieval_wcsc":
            return make_phase_retrieval_wcsc(
                int(spec.pop("n_terms")),
                int(spec.pop("dim_x")),
                lam=float(spec.pop("lam", 1.0)),
                sigma=float(spec.pop("sigma", 0.0)),
                data_seed=data_seed,
                x_bound=float(spec.pop("x_bound", 1.5)),
                y_cap=None if spec.get("y_cap") is None else float(spec.pop("y_cap")),
            )
    except KeyError as exc:
        raise ConfigError(f"problem spec is missing field {exc}") from exc
    raise ConfigError(f"unknown problem name {name!r}")


def resolve_start(problem: SaddleProblem, start: dict | None):
    if start is None:
        if problem.default_start is None:
            raise ConfigError("problem has no default start; provide config.start")
        return problem.default_start
    try:
        x0 = as_point(start["x0"])
        y0 = as_point(start["y0"])
    except KeyError as exc:
        raise ConfigError(f"start is missing field {exc}") from exc
    return x0, y0


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def emit_csv(trace: Trace, path: str | Path, zero_wallclock: bool = False) -> None:
    """Write a trace as CSV: fixed header, shortest round-trip decimals, LF."""
    lines = [CSV_HEADER]
    for row in trace:
        lines.append(
            ",".join(
                (
                    _fmt_cell(row.epoch),
                    _fmt_cell(row.iters_cumulative),
                    _fmt_cell(row.gap),
                    _fmt_cell(row.near_stationarity),
                    _fmt_cell(row.radius),
                    _fmt_cell(row.eta_x),
                    _fmt_cell(row.eta_y),
                    _fmt_cell(0 if zero_wallclock else row.wallclock_ns),
                )
            )
        )
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise RuntimeError(f"cannot write trace CSV {path}: {exc}") from exc


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    return obj


def emit_summary(payload: dict, path: str | Path) -> None:
    """Write a summary JSON document (sorted keys, two-space indent)."""
    try:
        Path(path).write_text(
            json.dumps(_jsonify(payload), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
            newline="\n",
        )
    except OSError as exc:
        raise RuntimeError(f"cannot write summary {path}: {exc}") from exc


@dataclass
class RunSummary:
    """In-memory view of an experiment summary plus its on-disk location."""

    payload: dict
    path: Path

    @property
    def ok(self) -> bool:
        return all(r["error"] is None for r in self.payload["runs"])


def _scsc_budget(problem: SaddleProblem, solver: dict, gap0: float, eps: float):
    if solver.get("mode", "theory") == "practical":
        scale = float(solver.get("scale", 1e-3))
    else:
        scale = None  # theory mode ignores any leftover scale field
    return theory_schedule(
        problem.mu, problem.lam, problem.noise.b1, problem.noise.b2,
        gap0, eps, float(solver.get("delta", 0.2)), scale,
    )


def _execute_run(problem, solver, x0, y0, seed, eps_target, gap0):
    rng = np.random.Generator(np.random.Philox(int(seed)))
    kind = solver["kind"]
    record = {"seed": int(seed), "eps_target": eps_target, "error": None,
              "final_gap": None, "final_measure": None, "tau": None}
    if kind == "epoch_gda_scsc":
        eps = float(solver["eps"]) if eps_target is None else float(eps_target)
        schedule = _scsc_budget(problem, solver, gap0, eps)
        _, _, trace = run_epoch_gda_scsc(
            problem, x0, y0, schedule, rng, eval_gap=bool(solver.get("eval_gap", True))
        )
        record["final_gap"] = trace[-1].gap
        record["total_iterations"] = schedule.total_iterations()
        return record, trace
    if kind == "pdsgd":
        if eps_target is None:
            iterations = int(solver["iterations"])
        else:
            iterations = _scsc_budget(problem, solver, gap0, float(eps_target)).total_iterations()
        rule_name = solver.get("step_rule", "inv_sqrt")
        c = solver.get("step_c")
        if rule_name == "constant":
            rule = Constant(float(c)) if c is not None else Constant(1.0)
        elif rule_name == "inv_sqrt":
            rule = InvSqrt(float(c)) if c is not None else default_step_rule(problem)
        else:
            raise ConfigError(f"unknown step_rule {rule_name!r}")
        _, _, trace = run_pdsgd(
            problem, x0, y0, iterations, rule, rng, eval_gap=bool(solver.get("eval_gap", True))
        )
        record["final_gap"] = trace[-1].gap
        record["total_iterations"] = iterations
        return record, trace
    if kind == "epoch_gda_wcsc":
        cfg = WcscConfig.for_problem(problem, int(solver["epochs"]))
        x_out, tau, trace = run_epoch_gda_wcsc(
            problem, x0, y0, cfg, rng, eval_measure=bool(solver.get("eval_measure", True))
        )
        record["tau"] = tau
        record["final_measure"] = trace[-1].near_stationarity
        record["total_iterations"] = trace[-1].iters_cumulative
        return record, trace
    raise ConfigError(f"unknown solver kind {kind!r}")


def run_experiment(config: ExperimentConfig) -> RunSummary:
    """Run one experiment: one run per (eps_target, seed), emit traces + summary.

    Per-run failures are recorded in the summary without aborting the
    other runs. Returns the summary; callers decide how to surface
    failures (the CLI maps them to a nonzero exit code).
    """
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem(config.problem)
    x0, y0 = resolve_start(problem, config.start)
    kind = config.solver["kind"]
    gap0 = None
    if kind in ("epoch_gda_scsc", "pdsgd") and (config.eps_targets is not None or kind == "epoch_gda_scsc"):
        gap0 = initial_gap(problem, x0, y0)
    targets = config.eps_targets if config.eps_targets is not None else [None]

    jobs = [(ti, target, seed) for ti, target in enumerate(targets) for seed in config.seeds]

    def job(args):
        ti, target, seed = args
        if config.eps_targets is None:
            csv_name = f"trace_s{seed:05d}.csv"
        else:
            csv_name = f"trace_t{ti:02d}_s{seed:05d}.csv"
        try:
            record, trace = _execute_run(problem, config.solver, x0, y0, seed, target, gap0)
            emit_csv(trace, out / csv_name, zero_wallclock=config.zero_wallclock)
            record["trace_csv"] = csv_name
        except Exception as exc:  # noqa: BLE001 - per-run isolation is the contract
            record = {
                "seed": int(seed), "eps_target": target, "error": f"{type(exc).__name__}: {exc}",
                "final_gap": None, "final_measure": None, "tau": None,
                "total_iterations": None, "trace_csv": None,
            }
        record["target_index"] = ti if config.eps_targets is not None else None
        return (ti, seed), record

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = dict(pool.map(job, jobs))
    else:
        results = dict(map(job, jobs))
    records = [results[key] for key in sorted(results)]

    by_target = None
    rate_fit = None
    if config.eps_targets is not None:
        by_target = []
        for ti, target in enumerate(targets):
            rows = [r for r in records if r["target_index"] == ti and r["error"] is None]
            gaps = [r["final_gap"] for r in rows if r["final_gap"] is not None]
            by_target.append(
                {
                    "eps_target": target,
                    "total_iterations": rows[0]["total_iterations"] if rows else None,
                    "median_final_gap": float(np.median(gaps)) if gaps else None,
                    "n_ok": len(rows),
                }
            )
        points = [
            (t["total_iterations"], t["median_final_gap"])
            for t in by_target
            if t["total_iterations"] and t["median_final_gap"] and t["median_final_gap"] > 0
        ]
        if len(points) >= 3:
            from .metrics import fit_loglog_slope

            slope, intercept, r2 = fit_loglog_slope(points)
            rate_fit = {"slope": slope, "intercept": intercept, "r2": r2, "n_points": len(points)}

    # worker count is an execution detail: outputs must be byte-identical
    # across thread counts, so it is not echoed into the summary
    config_echo = {k: v for k, v in config.to_dict().items() if k != "workers"}
    payload = {
        "version": SUMMARY_VERSION,
        "config": config_echo,
        "initial_gap": gap0,
        "runs": records,
        "by_target": by_target,
        "rate_fit": rate_fit,
    }
    summary_path = out / "summary.json"
    emit_summary(payload, summary_path)
    return RunSummary(payload=payload, path=summary_path)


def _resolve_axis(config_dict: dict, axis: str):
    parts = axis.split(".")
    node = config_dict
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            raise ConfigError(f"unknown sweep axis {axis!r}")
        node = node[p]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    current = node[leaf]
    if current is not None and not isinstance(current, (int, float)):
        raise ConfigError(f"sweep axis {axis!r} is not numeric")
    return node, leaf


def sweep(base_config: ExperimentConfig, axis: str, values) -> list[RunSummary]:
    """One run_experiment per axis value, in per-value subdirectories.

    Writes an aggregate JSON at <output_dir>/sweep_<axis>/aggregate.json
    and returns the per-value summaries in order.
    """
    values = list(values)
    if not values:
        raise ConfigError("sweep values must be nonempty")
    base = base_config.to_dict()
    _resolve_axis(base, axis)  # validate before any run
    root = Path(base_config.output_dir) / f"sweep_{axis.replace('.', '_')}"
    summaries = []
    for i, v in enumerate(values):
        cfg_dict = copy.deepcopy(base)
        node, leaf = _resolve_axis(cfg_dict, axis)
        node[leaf] = v
        cfg_dict["output_dir"] = str(root / f"value_{i:02d}")
        summaries.append(run_experiment(ExperimentConfig.from_dict(cfg_dict)))
    aggregate = {
        "version": SUMMARY_VERSION,
        "axis": axis,
        "values": list(values),
        "summaries": [str(s.path) for s in summaries],
        "median_final_gaps": [
            float(np.median([r["final_gap"] for r in s.payload["runs"] if r["final_gap"] is not None]))
            if any(r["final_gap"] is not None for r in s.payload["runs"])
            else None
            for s in summaries
        ],
    }
    emit_summary(aggregate, root / "aggregate.json")
    return summaries
