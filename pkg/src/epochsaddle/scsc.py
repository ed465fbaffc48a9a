"""Epoch-restarted projected stochastic gradient descent ascent (SCSC).

Runs standard projected descent/ascent steps inside a shrinking ball
around the current epoch center, restarts from the epoch averages, and
halves the step sizes while shrinking the radius by sqrt(2) and doubling
the iteration count between epochs. ``theory_schedule`` builds the full
high-probability parameterization from the problem constants; practical
mode keeps the schedule shape but scales the first epoch length down for
desk-scale budgets.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .problems import SaddleProblem, gap_value
from .sets import Ball, Point, WholeSpace, as_point, project_intersection
from .trace import Trace, TraceRow

_SQRT2 = math.sqrt(2.0)
_CHUNK = 1 << 16


@dataclass(frozen=True)
class ScscSchedule:
    """Per-epoch step sizes, radii, and iteration counts.

    Epoch k uses eta_x1 / 2^(k-1), eta_y1 / 2^(k-1), r1 / sqrt(2)^(k-1),
    and t1 * 2^(k-1) iterations, which keeps the exact halving/doubling
    relations at every epoch.
    """

    r1: float
    eta_x1: float
    eta_y1: float
    t1: int
    epochs: int
    delta_tilde: float
    mode: str = "theory"
    scale: float = 1.0

    def __post_init__(self):
        if self.r1 <= 0 or self.eta_x1 <= 0 or self.eta_y1 <= 0:
            raise ValueError("r1 and step sizes must be positive")
        if self.t1 < 1 or self.epochs < 1:
            raise ValueError("t1 and epochs must be >= 1")
        if not (0.0 < self.delta_tilde < 1.0):
            raise ValueError(f"delta_tilde must lie in (0, 1), got {self.delta_tilde}")
        if self.mode not in ("theory", "practical"):
            raise ValueError(f"mode must be 'theory' or 'practical', got {self.mode!r}")
        if not (0.0 < self.scale <= 1.0):
            raise ValueError(f"scale must lie in (0, 1], got {self.scale}")
        if self.t1 * ((1 << self.epochs) - 1) >= (1 << 63):
            raise ValueError("total iteration count t1 * (2^epochs - 1) overflows 63 bits")

    def epoch_params(self):
        """Yield (epoch, eta_x, eta_y, radius, steps) for each epoch in order."""
        eta_x, eta_y, radius, steps = self.eta_x1, self.eta_y1, self.r1, self.t1
        for k in range(1, self.epochs + 1):
            yield k, eta_x, eta_y, radius, steps
            eta_x = eta_x / 2.0
            eta_y = eta_y / 2.0
            radius = radius / _SQRT2
            steps = steps * 2

    def total_iterations(self) -> int:
        return self.t1 * ((1 << self.epochs) - 1)


def theory_schedule(
    mu: float,
    lam: float,
    b1: float,
    b2: float,
    gap0: float,
    eps: float,
    delta: float,
    scale: float | None = None,
) -> ScscSchedule:
    """Schedule reaching duality gap <= eps with probability 1 - delta.

    ``gap0`` bounds the duality gap at the start pair. The epoch count is
    ceil(log2(gap0 / eps)), matching the per-epoch gap halving that the
    radius/step decay is built around. Passing ``scale`` switches to
    practical mode: the first epoch length is multiplied by scale while
    every ratio relation between epochs is preserved.
    """
    for label, v in (("mu", mu), ("lam", lam), ("b1", b1), ("b2", b2), ("gap0", gap0), ("eps", eps)):
        if v <= 0:
            raise ValueError(f"{label} must be positive, got {v}")
    if eps >= gap0:
        raise ValueError(f"target eps {eps} must be below the initial gap bound {gap0}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if scale is not None and not (0.0 < scale <= 1.0):
        raise ValueError(f"scale must lie in (0, 1], got {scale}")
    epochs = max(1, math.ceil(math.log2(gap0 / eps) - 1e-12))
    delta_tilde = delta / epochs
    log_term = math.log(1.0 / delta_tilde)
    m = min(mu, lam)
    r1 = 2.0 * math.sqrt(2.0 * gap0 / m)
    eta_x1 = m * r1**2 / (40.0 * (5.0 + 3.0 * log_term) * b1**2)
    eta_y1 = m * r1**2 / (40.0 * (5.0 + 3.0 * log_term) * b2**2)
    t1_real = max(
        320.0**2 * (b1 + b2) ** 2 * 3.0 * log_term,
        3200.0 * (5.0 + 3.0 * log_term) * max(b1**2, b2**2),
    ) / (m**2 * r1**2)
    t1 = max(1, math.ceil(t1_real * (scale if scale is not None else 1.0)))
    return ScscSchedule(
        r1=r1,
        eta_x1=eta_x1,
        eta_y1=eta_y1,
        t1=t1,
        epochs=epochs,
        delta_tilde=delta_tilde,
        mode="practical" if scale is not None else "theory",
        scale=scale if scale is not None else 1.0,
    )


@dataclass
class EpochState:
    """Bookkeeping for one epoch: centers, running averages, step count."""

    epoch: int
    x_center: Point
    y_center: Point
    avg_x: Optional[Point] = None
    avg_y: Optional[Point] = None
    steps_done: int = 0


def _noise_block(rng: np.random.Generator, n: int, dim: int, sigma: float) -> np.ndarray:
    """A block of pre-scaled oracle noise; zeros consume no randomness."""
    if sigma > 0.0:
        return sigma * rng.standard_normal((n, dim))
    return np.zeros((n, dim))


def _kernel_set_args(s) -> tuple[int, np.ndarray, float] | None:
    if isinstance(s, WholeSpace):
        return _kernels.KIND_WHOLE, np.zeros(s.dim), 0.0
    if isinstance(s, Ball):
        return _kernels.KIND_BALL, s.center, s.radius
    return None


def _supports_fast_epoch(problem: SaddleProblem) -> bool:
    return (
        problem.quadratic is not None
        and _kernel_set_args(problem.set_x) is not None
        and _kernel_set_args(problem.set_y) is not None
    )


def run_epoch_scsc(
    problem: SaddleProblem,
    state: EpochState,
    eta_x: float,
    eta_y: float,
    radius: float,
    steps: int,
    rng: np.random.Generator,
    *,
    iterate_hook: Optional[Callable[[Point, Point], None]] = None,
    fast: bool = True,
) -> EpochState:
    """One epoch of projected descent/ascent inside B(center, radius).

    Both partial subgradients of an iteration are computed at the current
    pair under one shared noise sample before either variable moves. The
    returned averages are the uniform means over t = 0..steps-1: the
    initial point is included, the final iterate is not. ``iterate_hook``
    receives every iterate pair (forcing the generic path).
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if eta_x <= 0 or eta_y <= 0 or radius <= 0:
        raise ValueError("step sizes and radius must be positive")
    if not problem.set_x.contains(state.x_center) or not problem.set_y.contains(state.y_center):
        raise ValueError("epoch centers must be feasible")
    x = state.x_center.copy()
    y = state.y_center.copy()
    sum_x = np.zeros_like(x)
    sum_y = np.zeros_like(y)
    sigma = problem.noise.sigma
    use_fast = fast and iterate_hook is None and _supports_fast_epoch(problem)
    if use_fast:
        q = problem.quadratic
        A = np.ascontiguousarray(q.coupling)
        At = np.ascontiguousarray(q.coupling.T)
        kx, kx_center, kx_r = _kernel_set_args(problem.set_x)
        ky, ky_center, ky_r = _kernel_set_args(problem.set_y)
    done = 0
    while done < steps:
        n = min(_CHUNK, steps - done)
        noise_x = _noise_block(rng, n, problem.dim_x, sigma)
        noise_y = _noise_block(rng, n, problem.dim_y, sigma)
        if use_fast:
            _kernels.quad_scsc_epoch(
                x, y, sum_x, sum_y,
                A, At, q.b, q.c, q.mu, q.lam,
                eta_x, eta_y, noise_x, noise_y,
                state.x_center, state.y_center, radius,
                kx, kx_center, kx_r, ky, ky_center, ky_r,
            )
        else:
            for t in range(n):
                sum_x += x
                sum_y += y
                if iterate_hook is not None:
                    iterate_hook(x, y)
                gx = problem.grad_x(x, y) + noise_x[t]
                gy = problem.grad_y(x, y) + noise_y[t]
                x = project_intersection(problem.set_x, state.x_center, radius, x - eta_x * gx)
                y = project_intersection(problem.set_y, state.y_center, radius, y + eta_y * gy)
        done += n
    return EpochState(
        epoch=state.epoch,
        x_center=state.x_center,
        y_center=state.y_center,
        avg_x=sum_x / steps,
        avg_y=sum_y / steps,
        steps_done=steps,
    )


def run_epoch_gda_scsc(
    problem: SaddleProblem,
    x0,
    y0,
    schedule: ScscSchedule,
    rng: np.random.Generator,
    *,
    eval_gap: bool = True,
    epoch_hook: Optional[Callable[[int, Point, Point, Point, Point, float], None]] = None,
    iterate_hook: Optional[Callable[[Point, Point], None]] = None,
    fast: bool = True,
) -> tuple[Point, Point, Trace]:
    """Run the full epoch-restarted solver and return the final averages.

    Each epoch restarts from the previous epoch's averages; the trace gets
    one row per epoch with the duality gap of the restart pair (evaluated
    once per epoch when exact oracles are available), the epoch radius,
    step sizes, and cumulative iteration count. ``epoch_hook`` receives
    (epoch, x_center, y_center, avg_x, avg_y, radius) after each epoch.
    """
    if not problem.is_scsc:
        raise ValueError("run_epoch_gda_scsc requires a strongly convex problem (mu > 0)")
    x_c = as_point(x0)
    y_c = as_point(y0)
    if not problem.set_x.contains(x_c) or not problem.set_y.contains(y_c):
        raise ValueError("start pair must be feasible")
    has_oracles = (
        problem.exact is not None
        and problem.exact.best_response_x is not None
        and problem.exact.best_response_y is not None
    )
    trace: Trace = []
    cumulative = 0
    for k, eta_x, eta_y, radius, steps in schedule.epoch_params():
        t_start = time.perf_counter_ns()
        state = run_epoch_scsc(
            problem,
            EpochState(epoch=k, x_center=x_c, y_center=y_c),
            eta_x, eta_y, radius, steps, rng,
            iterate_hook=iterate_hook, fast=fast,
        )
        elapsed = time.perf_counter_ns() - t_start
        cumulative += steps
        gap = gap_value(problem, state.avg_x, state.avg_y) if (eval_gap and has_oracles) else None
        trace.append(
            TraceRow(
                epoch=k,
                iters_cumulative=cumulative,
                gap=gap,
                radius=radius,
                eta_x=eta_x,
                eta_y=eta_y,
                wallclock_ns=elapsed,
            )
        )
        if epoch_hook is not None:
            epoch_hook(k, x_c, y_c, state.avg_x, state.avg_y, radius)
        x_c, y_c = state.avg_x, state.avg_y
    return x_c, y_c, trace
