"""Epoch-restarted stochastic gradient descent-ascent for saddle problems.

Solvers for strongly-convex strongly-concave (epoch restarts with
shrinking ball constraints) and weakly-convex strongly-concave
(regularized epochs with random epoch output) min-max problems, an
averaged primal-dual SGD baseline, exact-oracle testbeds, convergence
metrics, and a reproducible experiment harness.
"""

from .baselines import Constant, InvSqrt, default_step_rule, run_pdsgd
from .harness import ConfigError, ExperimentConfig, RunSummary, build_problem, emit_csv, emit_summary, run_experiment, sweep
from .metrics import GapReport, duality_gap, fit_loglog_slope, gap_distance_residual, near_stationarity, regularized_gap
from .problems import (
    ExactOracles,
    InnerSolveError,
    NoiseModel,
    OracleError,
    SaddleProblem,
    best_responses,
    dro_data,
    gap_value,
    initial_gap,
    make_dro_scsc,
    make_phase_retrieval_wcsc,
    make_quadratic_scsc,
    phase_retrieval_data,
)
from .scsc import EpochState, ScscSchedule, run_epoch_gda_scsc, run_epoch_scsc, theory_schedule
from .sets import Ball, Box, ConvexSet, Point, ProjectionError, Simplex, WholeSpace, as_point, project, project_intersection
from .trace import CSV_HEADER, Trace, TraceRow
from .wcsc import WcscConfig, prox_step_x, regularized_saddle, run_epoch_gda_wcsc, total_wcsc_iterations, wcsc_stepsizes

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "Box",
    "CSV_HEADER",
    "ConfigError",
    "Constant",
    "ConvexSet",
    "EpochState",
    "ExactOracles",
    "ExperimentConfig",
    "GapReport",
    "InnerSolveError",
    "InvSqrt",
    "NoiseModel",
    "OracleError",
    "Point",
    "ProjectionError",
    "RunSummary",
    "SaddleProblem",
    "ScscSchedule",
    "Simplex",
    "Trace",
    "TraceRow",
    "WcscConfig",
    "WholeSpace",
    "as_point",
    "best_responses",
    "build_problem",
    "default_step_rule",
    "dro_data",
    "duality_gap",
    "emit_csv",
    "emit_summary",
    "fit_loglog_slope",
    "gap_distance_residual",
    "gap_value",
    "initial_gap",
    "make_dro_scsc",
    "make_phase_retrieval_wcsc",
    "make_quadratic_scsc",
    "near_stationarity",
    "phase_retrieval_data",
    "project",
    "project_intersection",
    "prox_step_x",
    "regularized_gap",
    "regularized_saddle",
    "run_epoch_gda_scsc",
    "run_epoch_gda_wcsc",
    "run_epoch_scsc",
    "run_experiment",
    "run_pdsgd",
    "sweep",
    "theory_schedule",
    "total_wcsc_iterations",
    "wcsc_stepsizes",
]
