"""Averaged stochastic primal-dual gradient baseline.

Plain projected descent/ascent with constant or 1/sqrt(t) step sizes and
uniform averaging: the O(1/sqrt(T)) reference that epoch-restarted runs
are benchmarked against. Gap checkpoints land at power-of-two iteration
counts plus the final budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .problems import SaddleProblem, gap_value
from .scsc import _kernel_set_args, _noise_block
from .sets import Box, Point, as_point
from .trace import Trace, TraceRow


@dataclass(frozen=True)
class Constant:
    """Fixed step size eta_t = c."""

    c: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("step constant must be positive")

    def at(self, t: int) -> float:
        return self.c


@dataclass(frozen=True)
class InvSqrt:
    """Decaying step size eta_t = c / sqrt(t + 1)."""

    c: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("step constant must be positive")

    def at(self, t: int) -> float:
        return self.c / float(np.sqrt(t + 1.0))


StepRule = Constant | InvSqrt


def default_step_rule(problem: SaddleProblem) -> InvSqrt:
    """InvSqrt with c = 1 / min(mu, lam); the exact constant only shifts the fit intercept."""
    m = min(problem.mu, problem.lam) if problem.is_scsc else problem.lam
    return InvSqrt(1.0 / m)


def _checkpoints(total: int) -> list[int]:
    marks = []
    t = 1
    while t < total:
        marks.append(t)
        t *= 2
    marks.append(total)
    return marks


def _pdsgd_set_args(s):
    args = _kernel_set_args(s)
    if args is not None:
        kind, center, r = args
        return kind, center, np.zeros(s.dim), r
    if isinstance(s, Box):
        return _kernels.KIND_BOX, s.lower, s.upper, 0.0
    return None


def run_pdsgd(
    problem: SaddleProblem,
    x0,
    y0,
    iterations: int,
    step_rule: StepRule,
    rng: np.random.Generator,
    *,
    eval_gap: bool = True,
    fast: bool = True,
) -> tuple[Point, Point, Trace]:
    """T projected descent/ascent steps; returns averages over t = 0..T-1.

    Projections hit the feasible sets only (no shrinking balls). Trace
    rows record the duality gap of the running average at power-of-two
    checkpoints and at the final iteration.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    x = as_point(x0).copy()
    y = as_point(y0).copy()
    if not problem.set_x.contains(x) or not problem.set_y.contains(y):
        raise ValueError("start pair must be feasible")
    has_oracles = (
        problem.exact is not None
        and problem.exact.best_response_x is not None
        and problem.exact.best_response_y is not None
    )
    sum_x = np.zeros_like(x)
    sum_y = np.zeros_like(y)
    sigma = problem.noise.sigma
    xa = _pdsgd_set_args(problem.set_x)
    ya = _pdsgd_set_args(problem.set_y)
    use_fast = fast and problem.quadratic is not None and xa is not None and ya is not None
    if use_fast:
        q = problem.quadratic
        A = np.ascontiguousarray(q.coupling)
        At = np.ascontiguousarray(q.coupling.T)
    trace: Trace = []
    done = 0
    t_start = time.perf_counter_ns()
    for idx, mark in enumerate(_checkpoints(iterations), start=1):
        while done < mark:
            n = min(1 << 16, mark - done)
            ts = np.arange(done, done + n, dtype=np.float64)
            steps = np.full(n, step_rule.c) if isinstance(step_rule, Constant) else step_rule.c / np.sqrt(ts + 1.0)
            noise_x = _noise_block(rng, n, problem.dim_x, sigma)
            noise_y = _noise_block(rng, n, problem.dim_y, sigma)
            if use_fast:
                _kernels.quad_pdsgd_chunk(
                    x, y, sum_x, sum_y, A, At, q.b, q.c, q.mu, q.lam,
                    steps, steps, noise_x, noise_y,
                    xa[0], xa[1], xa[2], xa[3], ya[0], ya[1], ya[2], ya[3],
                )
            else:
                for t in range(n):
                    sum_x += x
                    sum_y += y
                    gx = problem.grad_x(x, y) + noise_x[t]
                    gy = problem.grad_y(x, y) + noise_y[t]
                    x = problem.set_x.project(x - steps[t] * gx)
                    y = problem.set_y.project(y + steps[t] * gy)
            done += n
        avg_x = sum_x / done
        avg_y = sum_y / done
        gap = gap_value(problem, avg_x, avg_y) if (eval_gap and has_oracles) else None
        trace.append(
            TraceRow(
                epoch=idx,
                iters_cumulative=done,
                gap=gap,
                eta_x=step_rule.at(done - 1),
                eta_y=step_rule.at(done - 1),
                wallclock_ns=time.perf_counter_ns() - t_start,
            )
        )
    return sum_x / iterations, sum_y / iterations, trace
