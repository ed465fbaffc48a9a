"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
report lines as they complete. The heavy fixtures (rate experiments,
theory-constant halving runs) are shared between the criteria that
consume them.
"""

import math
from pathlib import Path

import numpy as np
import pytest

import epochsaddle as es
from epochsaddle.harness import build_problem, resolve_start

from _oracles import reference_project_intersection, reference_prox_argmin, sample_feasible


def _report(num: int, name: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {num}] {name}: {status} ({detail})", flush=True)


# ---------------------------------------------------------------------------
# shared fixtures

RATE_PROBLEM = {
    "name": "quadratic_scsc", "dim_x": 20, "dim_y": 20, "mu": 1.0, "lam": 1.0,
    "sigma": 1.0, "coupling_scale": 0.5, "b_scale": 3.0, "c_scale": -3.0,
    "set_radius": 2.0, "data_seed": 7,
}


@pytest.fixture(scope="module")
def rate_summaries(tmp_path_factory):
    """Criteria 1 and 2: epoch solver and baseline over shared budgets."""
    problem = build_problem(RATE_PROBLEM)
    x0, y0 = resolve_start(problem, None)
    gap0 = es.initial_gap(problem, x0, y0)
    targets = [gap0 / 2**k for k in range(2, 11)]
    base = {
        "problem": RATE_PROBLEM,
        "seeds": list(range(20)),
        "eps_targets": targets,
        "zero_wallclock": True,
        "workers": 4,
    }
    out = tmp_path_factory.mktemp("rate")
    epoch_cfg = es.ExperimentConfig.from_dict(
        {**base, "solver": {"kind": "epoch_gda_scsc", "delta": 0.2, "mode": "practical", "scale": 1e-3},
         "output_dir": str(out / "epoch")}
    )
    baseline_cfg = es.ExperimentConfig.from_dict(
        {**base, "solver": {"kind": "pdsgd", "delta": 0.2, "mode": "practical", "scale": 1e-3,
                            "step_rule": "inv_sqrt"},
         "output_dir": str(out / "baseline")}
    )
    return es.run_experiment(epoch_cfg), es.run_experiment(baseline_cfg)


HALVING_SEEDS = 100


@pytest.fixture(scope="module")
def halving_runs():
    """Criteria 3 and 7: full theory-constant runs on a 2-d quadratic."""
    problem = es.make_quadratic_scsc(
        2, 2, 1.0, 1.0, coupling=0.3 * np.eye(2), sigma=0.2,
        set_x=es.Ball(np.zeros(2), 1.0), set_y=es.Ball(np.zeros(2), 1.0),
    )
    x0 = np.ones(2) / math.sqrt(2.0)
    y0 = np.ones(2) / math.sqrt(2.0)
    gap0 = es.initial_gap(problem, x0, y0)
    schedule = es.theory_schedule(
        problem.mu, problem.lam, problem.noise.b1, problem.noise.b2,
        gap0, gap0 / 8.0, delta=0.2,
    )
    assert schedule.epochs == 3
    runs = []
    for seed in range(HALVING_SEEDS):
        rng = np.random.Generator(np.random.Philox(seed))
        epochs = []

        def hook(k, cx, cy, ax, ay, radius):
            epochs.append((k, cx.copy(), cy.copy(), ax.copy(), ay.copy(), radius))

        _, _, trace = es.run_epoch_gda_scsc(problem, x0, y0, schedule, rng, epoch_hook=hook)
        runs.append((epochs, [row.gap for row in trace]))
    return problem, schedule, runs


# ---------------------------------------------------------------------------
# criteria


def test_criterion_1_gap_rate(rate_summaries):
    epoch_summary, _ = rate_summaries
    fit = epoch_summary.payload["rate_fit"]
    budgets = [t["total_iterations"] for t in epoch_summary.payload["by_target"]]
    decades = math.log10(max(budgets) / min(budgets))
    ok = epoch_summary.ok and decades >= 2.5 and -1.25 <= fit["slope"] <= -0.75
    _report(1, "O(1/T) duality-gap rate", ok,
            f"slope={fit['slope']:.3f} in [-1.25,-0.75], span={decades:.2f} decades, r2={fit['r2']:.3f}")
    assert epoch_summary.ok
    assert decades >= 2.5
    assert -1.25 <= fit["slope"] <= -0.75


def test_criterion_2_baseline_separation(rate_summaries):
    epoch_summary, base_summary = rate_summaries
    fit = base_summary.payload["rate_fit"]
    eb = epoch_summary.payload["by_target"]
    bb = base_summary.payload["by_target"]
    assert [t["total_iterations"] for t in eb] == [t["total_iterations"] for t in bb]
    gap_epoch = eb[-1]["median_final_gap"]
    gap_base = bb[-1]["median_final_gap"]
    ratio = gap_epoch / gap_base
    ok = base_summary.ok and -0.7 <= fit["slope"] <= -0.3 and ratio <= 1.0 / 3.0
    _report(2, "baseline O(1/sqrt(T)) separation", ok,
            f"slope={fit['slope']:.3f} in [-0.7,-0.3], gap ratio at largest budget={ratio:.4f} <= 1/3")
    assert base_summary.ok
    assert -0.7 <= fit["slope"] <= -0.3
    assert ratio <= 1.0 / 3.0


def test_criterion_3_gap_halving(halving_runs):
    problem, schedule, runs = halving_runs
    m = min(problem.mu, problem.lam)
    counts = np.zeros(schedule.epochs, dtype=int)
    for epochs, gaps in runs:
        for (k, _, _, _, _, radius), gap in zip(epochs, gaps):
            if gap <= m * radius**2 / 16.0:
                counts[k - 1] += 1
    ok = bool(np.all(counts >= 80))
    _report(3, "per-epoch gap halving bound", ok,
            f"bound held in {counts.tolist()} of {HALVING_SEEDS} runs per epoch (need >= 80)")
    assert np.all(counts >= 80)


def test_criterion_4_gap_distance_inequality():
    rng = np.random.Generator(np.random.Philox(404))
    a1 = 0.6 * rng.standard_normal((3, 3))
    unconstrained = es.make_quadratic_scsc(
        3, 3, 1.2, 0.8, coupling=a1, b=0.3 * rng.standard_normal(3), c=0.2 * rng.standard_normal(3)
    )
    a2 = 0.4 * rng.standard_normal((2, 2))
    constrained = es.make_quadratic_scsc(
        2, 2, 1.0, 1.5, coupling=a2, b=0.5 * rng.standard_normal(2),
        set_x=es.Ball(np.zeros(2), 1.5), set_y=es.Ball(np.zeros(2), 1.5),
    )
    violations = 0
    worst = np.inf
    for problem in (unconstrained, constrained):
        for _ in range(10_000):
            pair0 = (sample_feasible(problem.set_x, rng), sample_feasible(problem.set_y, rng))
            pair1 = (sample_feasible(problem.set_x, rng), sample_feasible(problem.set_y, rng))
            res = es.gap_distance_residual(problem, pair0, pair1)
            worst = min(worst, res)
            if res < -1e-9:
                violations += 1
    ok = violations == 0
    _report(4, "gap-distance inequality residual", ok,
            f"{violations} violations in 2x10^4 pairs, min residual {worst:.3e} >= -1e-9")
    assert violations == 0


def test_criterion_5_prox_step_oracle_equivalence():
    rng = np.random.Generator(np.random.Philox(505))
    worst = 0.0
    for _ in range(1000):
        dim = int(rng.integers(2, 7))
        if rng.integers(0, 2) == 0:
            s = es.WholeSpace(dim)
        else:
            lo = -1.0 - rng.random(dim)
            s = es.Box(lo, lo + 0.5 + 2.0 * rng.random(dim))
        g = rng.standard_normal(dim)
        x_t = sample_feasible(s, rng)
        center = sample_feasible(s, rng)
        eta = 0.05 + rng.random()
        gamma = 0.05 + 3.0 * rng.random()
        got = es.prox_step_x(g, x_t, center, eta, gamma, s)
        ref = reference_prox_argmin(g, x_t, center, eta, gamma, s)
        worst = max(worst, float(np.linalg.norm(got - ref)))
    ok = worst <= 1e-8
    _report(5, "prox step vs numerical argmin", ok, f"max deviation {worst:.3e} <= 1e-8 over 10^3 instances")
    assert worst <= 1e-8


def test_criterion_6_wcsc_near_stationarity_decay():
    problem = es.make_phase_retrieval_wcsc(50, 10, lam=1.0, sigma=12.0, data_seed=11)
    x0, y0 = problem.default_start
    config = es.WcscConfig.for_problem(problem, epochs=200)
    measures = []
    iters = None
    for seed in range(10):
        rng = np.random.Generator(np.random.Philox(seed))
        _, _, trace = es.run_epoch_gda_wcsc(problem, x0, y0, config, rng)
        measures.append([row.near_stationarity for row in trace])
        iters = [row.iters_cumulative for row in trace]
    mean_sq = np.mean(np.asarray(measures) ** 2, axis=0)
    ratio = mean_sq[-1] / mean_sq[0]
    running_min = np.minimum.accumulate(mean_sq)
    slope, _, r2 = es.fit_loglog_slope(list(zip(iters, running_min)))
    ok = ratio <= 0.25 and -0.8 <= slope <= -0.25
    _report(6, "near-stationarity decay", ok,
            f"measure^2 ratio K=200 vs k=1: {ratio:.2e} <= 0.25, "
            f"running-min slope={slope:.3f} in [-0.8,-0.25] (r2={r2:.2f})")
    assert ratio <= 0.25
    assert -0.8 <= slope <= -0.25


def test_criterion_7_interior_best_responses(halving_runs):
    problem, schedule, runs = halving_runs
    counts = np.zeros(schedule.epochs, dtype=int)
    for epochs, _ in runs:
        for k, cx, cy, ax, ay, radius in epochs:
            brx = problem.exact.best_response_x(ay)
            bry = problem.exact.best_response_y(ax)
            if (np.linalg.norm(brx - cx) < radius) and (np.linalg.norm(bry - cy) < radius):
                counts[k - 1] += 1
    ok = bool(np.all(counts >= 80))
    _report(7, "best responses interior to epoch balls", ok,
            f"strictly interior in {counts.tolist()} of {HALVING_SEEDS} runs per epoch (need >= 80)")
    assert np.all(counts >= 80)


def test_criterion_8_byte_determinism(tmp_path):
    configs = [
        {
            "problem": {"name": "quadratic_scsc", "dim_x": 3, "dim_y": 3, "mu": 1.0, "lam": 1.0,
                        "sigma": 0.8, "coupling_scale": 0.4, "set_radius": 2.0, "data_seed": 5},
            "solver": {"kind": "epoch_gda_scsc", "delta": 0.2, "mode": "practical", "scale": 1e-3},
            "seeds": [0, 1, 2],
            "eps_targets": [0.5, 0.125, 0.03125],
            "output_dir": str(tmp_path / "det_scsc"),
            "zero_wallclock": True,
        },
        {
            "problem": {"name": "phase_retrieval_wcsc", "n_terms": 8, "dim_x": 4,
                        "sigma": 0.5, "data_seed": 6},
            "solver": {"kind": "epoch_gda_wcsc", "epochs": 4},
            "seeds": [0, 1],
            "output_dir": str(tmp_path / "det_wcsc"),
            "zero_wallclock": True,
        },
    ]
    ok = True
    total_files = 0
    for cfg_dict in configs:
        es.run_experiment(es.ExperimentConfig.from_dict(cfg_dict))
        first = {
            f.name: f.read_bytes() for f in sorted(Path(cfg_dict["output_dir"]).iterdir())
        }
        total_files += len(first)
        # identical config rerun into the same directory, then a worker-count
        # variation; every output byte (traces and summary) must be unchanged
        for workers in (1, 3):
            es.run_experiment(es.ExperimentConfig.from_dict({**cfg_dict, "workers": workers}))
            second = {
                f.name: f.read_bytes() for f in sorted(Path(cfg_dict["output_dir"]).iterdir())
            }
            if second != first:
                ok = False
    _report(8, "byte-identical reruns", ok,
            f"{total_files} files compared, wallclock zeroed, worker-count invariant")
    assert ok


def test_criterion_9_projection_property_suite():
    rng = np.random.Generator(np.random.Philox(909))
    violations = 0
    worst_ref = 0.0
    for trial in range(100):
        dim = int(rng.integers(2, 6))
        kind = trial % 4
        if kind == 0:
            s = es.WholeSpace(dim)
        elif kind == 1:
            lo = -1.0 - rng.random(dim)
            s = es.Box(lo, lo + 1.0 + 2.0 * rng.random(dim))
        elif kind == 2:
            s = es.Ball(0.5 * rng.standard_normal(dim), 0.5 + rng.random())
        else:
            s = es.Simplex(dim)
        p = 3.0 * rng.standard_normal(dim)
        u = 3.0 * rng.standard_normal(dim)
        q = es.project(s, p)
        if not s.contains(q, 1e-9):
            violations += 1
        if np.linalg.norm(es.project(s, q) - q) > 1e-12:
            violations += 1
        if np.linalg.norm(q - es.project(s, u)) > np.linalg.norm(p - u) + 1e-12:
            violations += 1
        feas = sample_feasible(s, rng)
        if np.linalg.norm(q - p) > np.linalg.norm(feas - p) + 1e-9:
            violations += 1
        center = sample_feasible(s, rng)
        radius = 0.3 + rng.random()
        target = center + 2.5 * rng.standard_normal(dim)
        qi = es.project_intersection(s, center, radius, target)
        if not s.contains(qi, 1e-9) or np.linalg.norm(qi - center) > radius + 1e-9:
            violations += 1
        ref = reference_project_intersection(s, center, radius, target)
        gap = np.linalg.norm(qi - target) - np.linalg.norm(ref - target)
        worst_ref = max(worst_ref, gap)
        if gap > 1e-6:
            violations += 1
    ok = violations == 0
    _report(9, "projection property suite", ok,
            f"{violations} violations over 100 instances, worst oracle slack {worst_ref:.2e}")
    assert violations == 0
