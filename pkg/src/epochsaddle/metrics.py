"""Convergence measures: duality gaps, near-stationarity, rate fits.

All evaluations go through exact best-response oracles (closed form or
certified inner solves), so the reported numbers are measurements of the
true quantities rather than solver-side estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import NEG_GAP_TOL, OracleError, SaddleProblem, best_responses
from .sets import Point, as_point
from .wcsc import regularized_saddle


@dataclass(frozen=True, eq=False)
class GapReport:
    """A duality gap together with the best responses that certify it.

    method is "closed_form" when both responses are exact closed forms,
    otherwise "inner_solve" with the certified suboptimality bound of the
    inner solver in ``achieved_tol``.
    """

    gap: float
    best_response_x: Point
    best_response_y: Point
    method: str
    achieved_tol: float = 0.0


def duality_gap(problem: SaddleProblem, x, y) -> GapReport:
    """Gap(x, y) = f(x, yhat(x)) - f(xhat(y), y) with its responses.

    Nonnegative up to floating-point slack: values in [-1e-9, 0) clamp to
    zero and anything lower raises, signalling a broken oracle.
    """
    x = as_point(x)
    y = as_point(y)
    if not problem.set_x.contains(x) or not problem.set_y.contains(y):
        raise ValueError("duality gap requires a feasible pair")
    brx, bry = best_responses(problem, x, y)
    g = problem.value(x, bry) - problem.value(brx, y)
    if g < -NEG_GAP_TOL:
        raise OracleError(f"duality gap {g:.3e} below -{NEG_GAP_TOL:.0e}: oracle inconsistency")
    ex = problem.exact
    closed = ex.x_closed_form and ex.y_closed_form
    return GapReport(
        gap=max(g, 0.0),
        best_response_x=brx,
        best_response_y=bry,
        method="closed_form" if closed else "inner_solve",
        achieved_tol=0.0 if closed else ex.inner_tol,
    )


def regularized_gap(problem: SaddleProblem, x_center, gamma: float, x, y) -> GapReport:
    """Duality gap of f(x, y) + (gamma/2)||x - x_center||^2."""
    x_center = as_point(x_center)
    if gamma <= problem.rho:
        raise ValueError(f"gamma must exceed the weak-convexity modulus {problem.rho}")
    if problem.regularize is None:
        raise ValueError(f"problem {problem.name!r} has no regularization support")
    return duality_gap(problem.regularize(x_center, gamma), x, y)


def near_stationarity(problem: SaddleProblem, x_tilde, gamma: float) -> tuple[Point, float]:
    """Proximal point z of the primal function at x_tilde and gamma * ||x_tilde - z||.

    The measure upper-bounds dist(0, dP(z)), so a small value certifies
    that x_tilde is near a point with a small primal subgradient.
    """
    x_tilde = as_point(x_tilde)
    z, _ = regularized_saddle(problem, x_tilde, gamma)
    return z, gamma * float(np.linalg.norm(x_tilde - z))


def gap_distance_residual(
    problem: SaddleProblem,
    pair0: tuple[Point, Point],
    pair1: tuple[Point, Point],
) -> float:
    """Slack of the inequality tying best-response distances to duality gaps.

    Returns [Gap(x0, y0) + Gap(x1, y1)]
          - [(mu/4) ||xhat(y1) - x0||^2 + (lam/4) ||yhat(x1) - y0||^2],
    which is nonnegative for strongly convex-concave problems.
    """
    if not problem.is_scsc:
        raise ValueError("the gap-distance inequality requires a strongly convex problem")
    x0, y0 = as_point(pair0[0]), as_point(pair0[1])
    x1, y1 = as_point(pair1[0]), as_point(pair1[1])
    report0 = duality_gap(problem, x0, y0)
    report1 = duality_gap(problem, x1, y1)
    dist_x = float(np.linalg.norm(report1.best_response_x - x0))
    dist_y = float(np.linalg.norm(report1.best_response_y - y0))
    lhs = 0.25 * problem.mu * dist_x**2 + 0.25 * problem.lam * dist_y**2
    return report0.gap + report1.gap - lhs


def fit_loglog_slope(points) -> tuple[float, float, float]:
    """Least squares fit of ln(value) against ln(budget).

    Returns (slope, intercept, r2). Requires at least three points with
    positive budgets and values.
    """
    pts = [(float(b), float(v)) for b, v in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    if any(b <= 0 or v <= 0 for b, v in pts):
        raise ValueError("budgets and values must be positive")
    lx = np.log([b for b, _ in pts])
    ly = np.log([v for _, v in pts])
    mx = lx.mean()
    my = ly.mean()
    var = float(np.sum((lx - mx) ** 2))
    if var == 0.0:
        raise ValueError("budgets must not all be identical")
    slope = float(np.sum((lx - mx) * (ly - my)) / var)
    intercept = float(my - slope * mx)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - my) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return slope, intercept, r2
