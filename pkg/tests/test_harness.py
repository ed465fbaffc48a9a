import json
import math
from pathlib import Path

import numpy as np
import pytest

from epochsaddle import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    TraceRow,
    build_problem,
    emit_csv,
    run_experiment,
    sweep,
)
from epochsaddle.cli import main


def small_config(tmp_path, **overrides):
    cfg = {
        "problem": {
            "name": "quadratic_scsc", "dim_x": 3, "dim_y": 3, "mu": 1.0, "lam": 1.0,
            "sigma": 0.5, "coupling_scale": 0.4, "set_radius": 2.0, "data_seed": 7,
        },
        "solver": {"kind": "epoch_gda_scsc", "delta": 0.2, "mode": "practical", "scale": 1e-3},
        "seeds": [0, 1],
        "eps_targets": [0.5, 0.125, 0.03125],
        "output_dir": str(tmp_path / "out"),
        "zero_wallclock": True,
    }
    cfg.update(overrides)
    return ExperimentConfig.from_dict(cfg)


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"problem": {"name": "nope"}, "solver": {"kind": "pdsgd"},
                                    "seeds": [0], "output_dir": "x"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"problem": {"name": "quadratic_scsc"},
                                    "solver": {"kind": "bad"}, "seeds": [0], "output_dir": "x"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"problem": {"name": "quadratic_scsc", "dim_x": 2},
                                    "solver": {"kind": "epoch_gda_scsc", "eps": 0.1},
                                    "seeds": [], "output_dir": "x"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"problem": {"name": "quadratic_scsc", "dim_x": 2},
                                    "solver": {"kind": "epoch_gda_wcsc", "epochs": 2},
                                    "seeds": [0], "output_dir": "x",
                                    "eps_targets": [0.1, 0.2, 0.3]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"problem": {"name": "quadratic_scsc", "dim_x": 2},
                                    "solver": {"kind": "epoch_gda_scsc"},
                                    "seeds": [0], "output_dir": "x"})


def test_build_problem_rejects_unknown_fields():
    with pytest.raises(ConfigError):
        build_problem({"name": "quadratic_scsc", "dim_x": 2, "bogus": 1})


def test_emit_csv_format(tmp_path):
    path = tmp_path / "t.csv"
    emit_csv([], path)
    assert path.read_text() == CSV_HEADER + "\n"
    rows = [
        TraceRow(epoch=1, iters_cumulative=10, gap=0.5, radius=1.0,
                 eta_x=0.25, eta_y=0.125, wallclock_ns=123),
        TraceRow(epoch=2, iters_cumulative=30, near_stationarity=0.75,
                 eta_x=0.1, eta_y=0.1, wallclock_ns=456),
    ]
    emit_csv(rows, path)
    text = path.read_text()
    lines = text.split("\n")
    assert lines[0] == CSV_HEADER
    assert lines[1] == "1,10,0.5,,1.0,0.25,0.125,123"
    assert lines[2] == "2,30,,0.75,,0.1,0.1,456"
    assert "\r" not in text
    emit_csv(rows, path, zero_wallclock=True)
    assert path.read_text().split("\n")[1].endswith(",0")


def test_run_experiment_single_epoch_has_one_row(tmp_path):
    from epochsaddle import initial_gap
    from epochsaddle.harness import resolve_start

    base = small_config(tmp_path)
    problem = build_problem(base.problem)
    gap0 = initial_gap(problem, *resolve_start(problem, None))
    cfg = small_config(tmp_path, eps_targets=None,
                       solver={"kind": "epoch_gda_scsc", "delta": 0.2, "eps": gap0 / 2.0,
                               "mode": "practical", "scale": 1e-3},
                       seeds=[0])
    summary = run_experiment(cfg)
    assert summary.ok
    csv_path = Path(cfg.output_dir) / summary.payload["runs"][0]["trace_csv"]
    lines = csv_path.read_text().strip().split("\n")
    assert len(lines) - 1 == 1  # eps = gap0/2 pins the epoch count to 1
    assert summary.payload["runs"][0]["final_gap"] is not None


def test_run_experiment_byte_determinism(tmp_path):
    cfg_a = small_config(tmp_path / "a")
    cfg_b = small_config(tmp_path / "b")
    s_a = run_experiment(cfg_a)
    s_b = run_experiment(cfg_b)
    files_a = sorted(Path(cfg_a.output_dir).glob("*.csv"))
    files_b = sorted(Path(cfg_b.output_dir).glob("*.csv"))
    assert [f.name for f in files_a] == [f.name for f in files_b]
    for fa, fb in zip(files_a, files_b):
        assert fa.read_bytes() == fb.read_bytes()
    pa = dict(s_a.payload)
    pb = dict(s_b.payload)
    pa["config"] = pb["config"] = None  # output_dir differs by construction
    assert json.dumps(pa, sort_keys=True) == json.dumps(pb, sort_keys=True)


def test_run_experiment_worker_count_invariance(tmp_path):
    cfg_a = small_config(tmp_path / "w1", workers=1)
    cfg_b = small_config(tmp_path / "w4", workers=4)
    run_experiment(cfg_a)
    run_experiment(cfg_b)
    for fa in sorted(Path(cfg_a.output_dir).glob("*.csv")):
        fb = Path(cfg_b.output_dir) / fa.name
        assert fa.read_bytes() == fb.read_bytes()


def test_trace_schedule_relations_cross_file(tmp_path):
    cfg = small_config(tmp_path)
    run_experiment(cfg)
    for csv_path in sorted(Path(cfg.output_dir).glob("*.csv")):
        lines = csv_path.read_text().strip().split("\n")[1:]
        rows = [line.split(",") for line in lines]
        etas = [float(r[5]) for r in rows]
        radii = [float(r[4]) for r in rows]
        iters = [int(r[1]) for r in rows]
        assert all(b > a for a, b in zip(iters, iters[1:]))
        steps = [b - a for a, b in zip([0] + iters, iters)]
        for a, b in zip(etas, etas[1:]):
            assert b == a / 2.0
        for a, b in zip(radii, radii[1:]):
            assert abs(b**2 - a**2 / 2.0) <= 8.0 * math.ulp(a**2)
        for a, b in zip(steps, steps[1:]):
            assert b == 2 * a


def test_summary_contains_rate_fit(tmp_path):
    cfg = small_config(tmp_path)
    summary = run_experiment(cfg)
    fit = summary.payload["rate_fit"]
    assert fit is not None and fit["n_points"] == 3
    assert fit["slope"] < 0


def test_wcsc_experiment(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "problem": {"name": "phase_retrieval_wcsc", "n_terms": 8, "dim_x": 4,
                    "sigma": 0.3, "data_seed": 5},
        "solver": {"kind": "epoch_gda_wcsc", "epochs": 3},
        "seeds": [0, 1],
        "output_dir": str(tmp_path / "w"),
        "zero_wallclock": True,
    })
    summary = run_experiment(cfg)
    assert summary.ok
    run0 = summary.payload["runs"][0]
    assert run0["tau"] in (1, 2, 3)
    assert run0["final_measure"] is not None
    assert run0["total_iterations"] == 71 + 106 + 142


def test_sweep_sigma_two_summaries(tmp_path):
    cfg = small_config(tmp_path, eps_targets=[0.5, 0.125, 0.03125], seeds=[0, 1])
    summaries = sweep(cfg, "problem.sigma", [0.0, 1.0])
    assert len(summaries) == 2
    agg = json.loads((Path(cfg.output_dir) / "sweep_problem_sigma" / "aggregate.json").read_text())
    assert agg["values"] == [0.0, 1.0]
    assert len(agg["median_final_gaps"]) == 2


def test_sweep_scale_monotone_median_gap(tmp_path):
    cfg = small_config(
        tmp_path,
        seeds=list(range(20)),
        eps_targets=None,
        solver={"kind": "epoch_gda_scsc", "delta": 0.2, "eps": 0.2,
                "mode": "practical", "scale": 1e-3},
        problem={"name": "quadratic_scsc", "dim_x": 2, "dim_y": 2, "mu": 1.0, "lam": 1.0,
                 "sigma": 1.0, "coupling_scale": 0.3, "set_radius": 1.5, "data_seed": 3},
    )
    summaries = sweep(cfg, "solver.scale", [1e-3, 1e-2])
    medians = [
        float(np.median([r["final_gap"] for r in s.payload["runs"]])) for s in summaries
    ]
    assert medians[1] <= medians[0]  # more iterations, smaller or equal gap


def test_sweep_errors(tmp_path):
    cfg = small_config(tmp_path)
    with pytest.raises(ConfigError):
        sweep(cfg, "problem.sigma", [])
    with pytest.raises(ConfigError):
        sweep(cfg, "problem.nonexistent", [1.0])
    with pytest.raises(ConfigError):
        sweep(cfg, "problem.name", [1.0])


def test_cli_run_and_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg = small_config(tmp_path, seeds=[0], eps_targets=[0.5, 0.25, 0.125])
    cfg_path.write_text(json.dumps(cfg.to_dict()))
    assert main(["run", str(cfg_path), "--zero-wallclock"]) == 0
    summary_path = Path(cfg.output_dir) / "summary.json"
    assert summary_path.exists()

    assert main(["rate-fit", str(summary_path)]) == 0
    out = capsys.readouterr().out
    fit = json.loads(out.strip().split("\n")[-1])
    assert "slope" in fit

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 1

    cfg2 = dict(cfg.to_dict())
    cfg2["solver"] = {"kind": "epoch_gda_scsc", "eps": 0.5}
    cfg2["problem"] = dict(cfg2["problem"], dim_x=0)  # breaks at runtime
    bad2 = tmp_path / "bad2.json"
    bad2.write_text(json.dumps(cfg2))
    assert main(["run", str(bad2)]) == 2


def test_cli_seed_parsing_and_overrides(tmp_path):
    cfg = small_config(tmp_path, seeds=[5], eps_targets=[0.5, 0.25, 0.125])
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg.to_dict()))
    out_dir = tmp_path / "cli_out"
    assert main(["run", str(cfg_path), "--output-dir", str(out_dir), "--seeds", "0,2-3"]) == 0
    payload = json.loads((out_dir / "summary.json").read_text())
    assert sorted({r["seed"] for r in payload["runs"]}) == [0, 2, 3]


def test_cli_sweep(tmp_path):
    cfg = small_config(tmp_path, seeds=[0], eps_targets=[0.5, 0.25, 0.125])
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg.to_dict()))
    assert main(["sweep", str(cfg_path), "--axis", "problem.sigma", "--values", "0.0,0.5"]) == 0
