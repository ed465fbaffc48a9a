"""Saddle problems with stochastic subgradient oracles and exact testbeds.

A :class:`SaddleProblem` bundles the objective f(x, y), deterministic
partial subgradients, convexity/concavity moduli, feasible sets, a noise
model, and (for testbeds) exact best-response oracles that make duality
gaps computable at machine precision.

Three generators are provided:

* :func:`make_quadratic_scsc` - strongly-convex strongly-concave bilinear
  quadratic with closed-form best responses and saddle point,
* :func:`make_dro_scsc` - simplex-weighted hinge losses (robust-weighting
  flavor) with a closed-form dual response and a certified QP inner solve
  for the primal response,
* :func:`make_phase_retrieval_wcsc` - weakly-convex strongly-concave
  weighted absolute quadratic residuals on a box.

Stochastic oracles add i.i.d. Gaussian noise per coordinate on top of the
deterministic subgradient; the recorded constants (b1, b2) certify the
sub-Gaussian norm condition and (m1, m2) the raw second-moment bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .sets import Ball, Box, ConvexSet, Point, Simplex, WholeSpace, as_point

NEG_GAP_TOL = 1e-9


class OracleError(RuntimeError):
    """A best-response oracle is missing or produced an inconsistent value."""


class InnerSolveError(RuntimeError):
    """An inner solve failed to reach its certified tolerance."""

    def __init__(self, message: str, achieved: float = math.nan):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian oracle noise with recorded moment certificates.

    sigma is the per-coordinate standard deviation (0 means the oracles
    are deterministic). b1/b2 certify E[exp(||G||^2 / b^2)] <= e for the
    x/y oracles over the feasible region; m1/m2 bound E[||G||^2].
    """

    sigma: float
    b1: float
    b2: float
    m1: float
    m2: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        for name in ("b1", "b2", "m1", "m2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def kind(self) -> str:
        return "none" if self.sigma == 0.0 else "gaussian"


@dataclass(frozen=True)
class ExactOracles:
    """Best responses, optional saddle point, and the primal function.

    best_response_x(y) minimizes f(., y); best_response_y(x) maximizes
    f(x, .). ``x_closed_form``/``y_closed_form`` record whether each side
    is an exact closed form or an inner solve certified to ``inner_tol``
    suboptimality. ``primal_grad`` is the gradient of the primal function
    where it is differentiable (used by stationarity checks).
    """

    best_response_x: Optional[Callable[[Point], Point]]
    best_response_y: Optional[Callable[[Point], Point]]
    saddle: Optional[tuple[Point, Point]] = None
    primal_value: Optional[Callable[[Point], float]] = None
    primal_grad: Optional[Callable[[Point], Point]] = None
    x_closed_form: bool = True
    y_closed_form: bool = True
    inner_tol: float = 0.0


@dataclass(frozen=True, eq=False)
class QuadraticCoeffs:
    """Coefficients of f(x,y) = mu/2 |x|^2 + x'Ay + b'x - c'y - lam/2 |y|^2 (+ const)."""

    mu: float
    lam: float
    coupling: np.ndarray
    b: np.ndarray
    c: np.ndarray
    const: float = 0.0


@dataclass(frozen=True, eq=False)
class SaddleProblem:
    """A stochastic min-max problem min_x max_y f(x, y).

    Exactly one of ``mu > 0`` (strongly convex in x) or ``rho > 0``
    (weakly convex in x) holds; ``lam > 0`` always (strongly concave
    in y). Problems are immutable and safe to share across concurrent
    runs; all randomness flows through caller-supplied generators.
    """

    dim_x: int
    dim_y: int
    set_x: ConvexSet
    set_y: ConvexSet
    mu: float
    rho: float
    lam: float
    noise: NoiseModel
    value: Callable[[Point, Point], float]
    grad_x: Callable[[Point, Point], Point]
    grad_y: Callable[[Point, Point], Point]
    exact: Optional[ExactOracles] = None
    regularize: Optional[Callable[[Point, float], "SaddleProblem"]] = None
    prox_saddle: Optional[Callable[[Point, float], tuple[Point, Point]]] = None
    quadratic: Optional[QuadraticCoeffs] = None
    default_start: Optional[tuple[Point, Point]] = None
    name: str = "custom"

    def __post_init__(self):
        if self.dim_x < 1 or self.dim_y < 1:
            raise ValueError("dimensions must be positive")
        if self.set_x.dim != self.dim_x or self.set_y.dim != self.dim_y:
            raise ValueError("feasible set dimensions do not match the problem")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if (self.mu > 0) == (self.rho > 0):
            raise ValueError("exactly one of mu > 0 (SCSC) or rho > 0 (WCSC) must hold")

    @property
    def is_scsc(self) -> bool:
        return self.mu > 0

    @property
    def is_wcsc(self) -> bool:
        return self.rho > 0

    def subgrad_x(self, x: Point, y: Point, rng: np.random.Generator) -> Point:
        g = self.grad_x(x, y)
        if self.noise.sigma > 0:
            g = g + self.noise.sigma * rng.standard_normal(self.dim_x)
        return g

    def subgrad_y(self, x: Point, y: Point, rng: np.random.Generator) -> Point:
        g = self.grad_y(x, y)
        if self.noise.sigma > 0:
            g = g + self.noise.sigma * rng.standard_normal(self.dim_y)
        return g

    def subgrad_pair(self, x: Point, y: Point, rng: np.random.Generator) -> tuple[Point, Point]:
        """Both partial subgradients at (x, y) under one noise sample.

        The x-noise block is drawn before the y-noise block; together they
        form the single random draw shared by the two partials.
        """
        gx = self.grad_x(x, y)
        gy = self.grad_y(x, y)
        if self.noise.sigma > 0:
            gx = gx + self.noise.sigma * rng.standard_normal(self.dim_x)
            gy = gy + self.noise.sigma * rng.standard_normal(self.dim_y)
        return gx, gy


def best_responses(problem: SaddleProblem, x: Point, y: Point) -> tuple[Point, Point]:
    """(argmin_x' f(x', y), argmax_y' f(x, y')) via the problem's oracles."""
    ex = problem.exact
    if ex is None or ex.best_response_x is None or ex.best_response_y is None:
        raise OracleError(f"problem {problem.name!r} has no exact best-response oracles")
    return ex.best_response_x(y), ex.best_response_y(x)


def gap_value(problem: SaddleProblem, x: Point, y: Point) -> float:
    """Duality gap f(x, yhat(x)) - f(xhat(y), y), clamped at -1e-9.

    Values in [-1e-9, 0) are rounded to zero (floating-point slack); a
    gap below -1e-9 signals a broken oracle and raises.
    """
    brx, bry = best_responses(problem, x, y)
    g = problem.value(x, bry) - problem.value(brx, y)
    if g < -NEG_GAP_TOL:
        raise OracleError(f"duality gap {g:.3e} below -{NEG_GAP_TOL:.0e}: oracle inconsistency")
    return max(g, 0.0)


def initial_gap(problem: SaddleProblem, x0: Point, y0: Point) -> float:
    """Exact duality gap at a start pair, the bound epoch schedules need."""
    x0 = as_point(x0)
    y0 = as_point(y0)
    if not problem.set_x.contains(x0) or not problem.set_y.contains(y0):
        raise ValueError("start pair must be feasible")
    return gap_value(problem, x0, y0)


# ---------------------------------------------------------------------------
# quadratic testbed


def _quadratic_problem(
    dim_x: int,
    dim_y: int,
    mu: float,
    lam: float,
    coupling: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    sigma: float,
    set_x: ConvexSet,
    set_y: ConvexSet,
    const: float,
    bound_radius: float,
    name: str,
) -> SaddleProblem:
    A = coupling

    def value(x: Point, y: Point) -> float:
        return float(0.5 * mu * (x @ x) + x @ (A @ y) + b @ x - c @ y - 0.5 * lam * (y @ y) + const)

    def grad_x(x: Point, y: Point) -> Point:
        return mu * x + A @ y + b

    def grad_y(x: Point, y: Point) -> Point:
        return A.T @ x - c - lam * y

    def best_response_x(y: Point) -> Point:
        return set_x.project(-(A @ y + b) / mu)

    def best_response_y(x: Point) -> Point:
        return set_y.project((A.T @ x - c) / lam)

    def primal_value(x: Point) -> float:
        return value(x, best_response_y(x))

    def primal_grad(x: Point) -> Point:
        return grad_x(x, best_response_y(x))

    def unconstrained_saddle() -> tuple[Point, Point]:
        lhs = mu * np.eye(dim_x) + (A @ A.T) / lam
        rhs = (A @ c) / lam - b
        xs = np.linalg.solve(lhs, rhs)
        ys = (A.T @ xs - c) / lam
        return xs, ys

    xs, ys = unconstrained_saddle()
    saddle = (xs, ys) if set_x.contains(xs, 1e-12) and set_y.contains(ys, 1e-12) else None

    a_norm = float(np.linalg.norm(A, 2)) if A.size else 0.0
    bx = set_x.bound_norm()
    by = set_y.bound_norm()
    bx = bound_radius if bx is None else bx
    by = bound_radius if by is None else by
    gmax_x = mu * bx + a_norm * by + float(np.linalg.norm(b))
    gmax_y = a_norm * bx + lam * by + float(np.linalg.norm(c))
    noise = NoiseModel(
        sigma=sigma,
        b1=math.sqrt(2.0 * (gmax_x**2 + sigma**2 * dim_x)),
        b2=math.sqrt(2.0 * (gmax_y**2 + sigma**2 * dim_y)),
        m1=math.sqrt(gmax_x**2 + sigma**2 * dim_x),
        m2=math.sqrt(gmax_y**2 + sigma**2 * dim_y),
    )

    exact = ExactOracles(
        best_response_x=best_response_x,
        best_response_y=best_response_y,
        saddle=saddle,
        primal_value=primal_value,
        primal_grad=primal_grad,
    )

    def regularize(center: Point, gamma: float) -> SaddleProblem:
        center = as_point(center)
        return _quadratic_problem(
            dim_x, dim_y, mu + gamma, lam, A, b - gamma * center, c, sigma,
            set_x, set_y, const + 0.5 * gamma * float(center @ center),
            bound_radius, name=f"{name}+prox",
        )

    def prox_saddle(center: Point, gamma: float) -> tuple[Point, Point]:
        reg = regularize(center, gamma)
        if reg.exact.saddle is not None:
            return reg.exact.saddle
        return _extragradient_saddle(reg)

    problem = SaddleProblem(
        dim_x=dim_x, dim_y=dim_y, set_x=set_x, set_y=set_y,
        mu=mu, rho=0.0, lam=lam, noise=noise,
        value=value, grad_x=grad_x, grad_y=grad_y,
        exact=exact, regularize=regularize, prox_saddle=prox_saddle,
        quadratic=QuadraticCoeffs(mu=mu, lam=lam, coupling=A, b=b, c=c, const=const),
        default_start=(set_x.project(np.ones(dim_x)), set_y.project(np.ones(dim_y))),
        name=name,
    )
    return problem


def make_quadratic_scsc(
    dim_x: int,
    dim_y: int,
    mu: float,
    lam: float,
    coupling=None,
    b=None,
    c=None,
    sigma: float = 0.0,
    set_x: ConvexSet | None = None,
    set_y: ConvexSet | None = None,
    bound_radius: float = 10.0,
) -> SaddleProblem:
    """Quadratic SCSC testbed f(x,y) = mu/2|x|^2 + x'Ay + b'x - c'y - lam/2|y|^2.

    Best responses are closed forms (projected when the sets constrain,
    which stays exact because both partial Hessians are isotropic). The
    saddle point is attached when the unconstrained solution is feasible.
    ``bound_radius`` is the reference radius used for the noise-moment
    certificates when a feasible set is unbounded.
    """
    if mu <= 0 or lam <= 0:
        raise ValueError("mu and lam must be positive")
    A = np.zeros((dim_x, dim_y)) if coupling is None else np.asarray(coupling, dtype=np.float64)
    if A.shape != (dim_x, dim_y):
        raise ValueError(f"coupling must have shape ({dim_x}, {dim_y}), got {A.shape}")
    b = np.zeros(dim_x) if b is None else as_point(b)
    c = np.zeros(dim_y) if c is None else as_point(c)
    set_x = WholeSpace(dim_x) if set_x is None else set_x
    set_y = WholeSpace(dim_y) if set_y is None else set_y
    return _quadratic_problem(
        dim_x, dim_y, float(mu), float(lam), A, b, c, float(sigma),
        set_x, set_y, 0.0, float(bound_radius), name="quadratic_scsc",
    )


def _extragradient_saddle(
    problem: SaddleProblem, tol: float = 1e-13, max_iter: int = 500_000
) -> tuple[Point, Point]:
    """Deterministic extragradient to the saddle of a smooth SCSC problem."""
    q = problem.quadratic
    if q is not None:
        lips = max(q.mu, q.lam) + (float(np.linalg.norm(q.coupling, 2)) if q.coupling.size else 0.0)
    else:
        lips = 10.0 * max(problem.mu, problem.lam)
    step = 0.5 / lips
    x = problem.set_x.project(np.zeros(problem.dim_x))
    y = problem.set_y.project(np.zeros(problem.dim_y))
    for _ in range(max_iter):
        xm = problem.set_x.project(x - step * problem.grad_x(x, y))
        ym = problem.set_y.project(y + step * problem.grad_y(x, y))
        xn = problem.set_x.project(x - step * problem.grad_x(xm, ym))
        yn = problem.set_y.project(y + step * problem.grad_y(xm, ym))
        res = max(float(np.linalg.norm(xn - x)), float(np.linalg.norm(yn - y)))
        x, y = xn, yn
        if res <= tol * (1.0 + float(np.linalg.norm(x)) + float(np.linalg.norm(y))):
            return x, y
    raise InnerSolveError(f"extragradient saddle solve stalled at residual {res:.3e}", achieved=res)


# ---------------------------------------------------------------------------
# robust-weighting (hinge) testbed


def dro_data(n: int, dim: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-seed synthetic features and +-1 labels for the hinge testbed."""
    rng = np.random.Generator(np.random.Philox(seed))
    features = rng.standard_normal((n, dim)) / math.sqrt(dim)
    labels = np.where(rng.standard_normal(n) >= 0.0, 1.0, -1.0)
    return features, labels


def _dro_best_response_x(
    features: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray,
    mu_quad: float,
    x_linear: np.ndarray,
    radius_guard: float | None,
) -> tuple[Point, float]:
    """Certified QP solve of min_x mu/2|x|^2 + x_linear'x + sum_i w_i hinge_i(x).

    Uses an interior-point QP on the epigraph form; returns the minimizer
    and the solver's duality gap as the achieved suboptimality bound.
    """
    from cvxopt import matrix, solvers

    d = features.shape[1]
    keep = np.nonzero(weights > 0.0)[0]
    if keep.size == 0:
        x = -x_linear / mu_quad
        if radius_guard is not None:
            nx = float(np.linalg.norm(x))
            if nx > radius_guard:
                x = x * (radius_guard / nx)
        return x, 0.0
    Ak = features[keep]
    tk = labels[keep]
    wk = weights[keep]
    m = keep.size
    P = np.zeros((d + m, d + m))
    P[:d, :d] = mu_quad * np.eye(d)
    qv = np.concatenate([x_linear, wk])
    G = np.zeros((2 * m, d + m))
    h = np.zeros(2 * m)
    G[:m, d:] = -np.eye(m)
    G[m:, :d] = -tk[:, None] * Ak
    G[m:, d:] = -np.eye(m)
    h[m:] = -1.0
    opts = {
        "show_progress": False,
        "abstol": 1e-12,
        "reltol": 1e-12,
        "feastol": 1e-12,
        "maxiters": 200,
    }
    sol = solvers.qp(matrix(P), matrix(qv), matrix(G), matrix(h), options=opts)
    achieved = float(sol["gap"])
    if sol["status"] != "optimal" and achieved > 1e-10:
        raise InnerSolveError(f"inner QP ended with status {sol['status']!r}", achieved=achieved)
    x = np.asarray(sol["x"])[:d, 0]
    if radius_guard is not None and float(np.linalg.norm(x)) > radius_guard * (1.0 - 1e-9):
        raise InnerSolveError(
            "minimizer reached the feasible ball boundary; enlarge radius_x", achieved=achieved
        )
    return x, achieved


def _build_dro(
    features: np.ndarray,
    labels: np.ndarray,
    mu_quad: float,
    lam: float,
    sigma: float,
    set_x: Ball,
    x_linear: np.ndarray,
    const: float,
    mu_mode: float,
    name: str,
) -> SaddleProblem:
    n, d = features.shape
    uniform = np.full(n, 1.0 / n)
    set_y = Simplex(n)

    def losses(x: Point) -> np.ndarray:
        return np.maximum(0.0, 1.0 - labels * (features @ x))

    def value(x: Point, y: Point) -> float:
        diff = y - uniform
        return float(
            y @ losses(x) + 0.5 * mu_quad * (x @ x) + x_linear @ x + const - 0.5 * lam * (diff @ diff)
        )

    def grad_x(x: Point, y: Point) -> Point:
        active = (1.0 - labels * (features @ x)) > 0.0
        coef = np.where(active, y * labels, 0.0)
        return mu_quad * x + x_linear - features.T @ coef

    def grad_y(x: Point, y: Point) -> Point:
        return losses(x) - lam * (y - uniform)

    def best_response_y(x: Point) -> Point:
        return set_y.project(uniform + losses(x) / lam)

    def best_response_x(y: Point) -> Point:
        x, _ = _dro_best_response_x(features, labels, y, mu_quad, x_linear, set_x.radius)
        return x

    def primal_value(x: Point) -> float:
        return value(x, best_response_y(x))

    max_a = float(np.max(np.linalg.norm(features, axis=1)))
    bx = set_x.bound_norm()
    gmax_x = max_a + mu_quad * bx + float(np.linalg.norm(x_linear))
    loss_cap = 1.0 + max_a * bx
    gmax_y = loss_cap * math.sqrt(n) + lam * math.sqrt(2.0)
    noise = NoiseModel(
        sigma=sigma,
        b1=math.sqrt(2.0 * (gmax_x**2 + sigma**2 * d)),
        b2=math.sqrt(2.0 * (gmax_y**2 + sigma**2 * n)),
        m1=math.sqrt(gmax_x**2 + sigma**2 * d),
        m2=math.sqrt(gmax_y**2 + sigma**2 * n),
    )

    exact = ExactOracles(
        best_response_x=best_response_x,
        best_response_y=best_response_y,
        saddle=None,
        primal_value=primal_value,
        x_closed_form=False,
        y_closed_form=True,
        inner_tol=1e-10,
    )

    def regularize(center: Point, gamma: float) -> SaddleProblem:
        center = as_point(center)
        return _build_dro(
            features, labels, mu_quad + gamma, lam, sigma, set_x,
            x_linear - gamma * center, const + 0.5 * gamma * float(center @ center),
            mu_mode + gamma, name=f"{name}+prox",
        )

    return SaddleProblem(
        dim_x=d, dim_y=n, set_x=set_x, set_y=set_y,
        mu=mu_mode, rho=0.0, lam=lam, noise=noise,
        value=value, grad_x=grad_x, grad_y=grad_y,
        exact=exact, regularize=regularize, prox_saddle=None,
        quadratic=None,
        default_start=(np.zeros(d), np.eye(n)[0]),
        name=name,
    )


def make_dro_scsc(
    n_losses: int,
    dim_x: int,
    mu: float,
    lam: float,
    data: tuple[np.ndarray, np.ndarray] | None = None,
    sigma: float = 0.0,
    radius_x: float | None = None,
    data_seed: int = 0,
) -> SaddleProblem:
    """Simplex-weighted hinge testbed, strongly convex-concave.

    f(x, y) = sum_i y_i max(0, 1 - t_i <a_i, x>) + mu/2 |x|^2
              - lam/2 |y - 1/n|^2,  y on the probability simplex.

    The y-response is an exact simplex projection; the x-response is a
    certified QP inner solve. ``radius_x`` bounds the x-ball and defaults
    to twice the norm bound of any minimizer, so the ball stays inactive
    at best responses.
    """
    if n_losses < 1:
        raise ValueError(f"n_losses must be >= 1, got {n_losses}")
    if mu <= 0 or lam <= 0:
        raise ValueError("mu and lam must be positive")
    if data is None:
        features, labels = dro_data(n_losses, dim_x, data_seed)
    else:
        features = np.asarray(data[0], dtype=np.float64)
        labels = np.asarray(data[1], dtype=np.float64)
    if features.shape != (n_losses, dim_x) or labels.shape != (n_losses,):
        raise ValueError("data must be (features (n, d), labels (n,))")
    max_a = float(np.max(np.linalg.norm(features, axis=1)))
    if radius_x is None:
        radius_x = 2.0 * (1.0 + max_a / mu)
    set_x = Ball(np.zeros(dim_x), float(radius_x))
    return _build_dro(
        features, labels, float(mu), float(lam), float(sigma), set_x,
        np.zeros(dim_x), 0.0, float(mu), name="dro_scsc",
    )


# ---------------------------------------------------------------------------
# weakly convex testbed (absolute quadratic residuals)


def phase_retrieval_data(n: int, dim: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-seed sensing vectors and exact squared measurements."""
    rng = np.random.Generator(np.random.Philox(seed))
    sensing = rng.standard_normal((n, dim)) / math.sqrt(dim)
    planted = rng.standard_normal(dim) / math.sqrt(dim)
    b = (sensing @ planted) ** 2
    return sensing, b


def _minimize_strongly_convex_box(
    fun,
    grad,
    lower: np.ndarray,
    upper: np.ndarray,
    x0: np.ndarray,
    strong_mu: float,
    target_residual: float = 1e-10,
    max_polish: int = 20_000,
) -> tuple[np.ndarray, float]:
    """Minimize a C1 strongly convex function over a box to high accuracy.

    L-BFGS-B does the heavy lifting; a backtracking projected-gradient
    polish then drives the fixed-point residual ||x - P(x - s g)|| / s
    below ``target_residual``, which bounds the distance to the minimizer
    by residual / strong_mu on interior solutions.
    """
    from scipy.optimize import minimize

    res = minimize(
        fun, x0, jac=grad, method="L-BFGS-B",
        bounds=list(zip(lower, upper)),
        options={"maxiter": 5000, "ftol": 1e-18, "gtol": 1e-14, "maxcor": 30},
    )
    x = np.clip(res.x, lower, upper)
    step = 1.0 / max(strong_mu, 1e-12)
    fx = fun(x)
    for _ in range(max_polish):
        g = grad(x)
        while True:
            cand = np.clip(x - step * g, lower, upper)
            drop = g @ (x - cand)
            if fun(cand) <= fx - 0.5 * drop or step < 1e-18:
                break
            step *= 0.5
        residual = float(np.linalg.norm(x - cand)) / step
        if residual <= target_residual:
            x = cand
            break
        x = cand
        fx = fun(x)
        step = min(step * 2.0, 1e6)
    else:
        g = grad(x)
        cand = np.clip(x - step * g, lower, upper)
        residual = float(np.linalg.norm(x - cand)) / step
        if residual > 1e-6:
            raise InnerSolveError(
                f"box minimization stalled at fixed-point residual {residual:.3e}",
                achieved=residual,
            )
    return x, residual / max(strong_mu, 1e-12)


def make_phase_retrieval_wcsc(
    n_terms: int,
    dim_x: int,
    lam: float = 1.0,
    sigma: float = 0.0,
    data: tuple[np.ndarray, np.ndarray] | None = None,
    data_seed: int = 0,
    x_bound: float = 1.5,
    y_cap: float | None = None,
    rho_override: float | None = None,
) -> SaddleProblem:
    """Weakly-convex strongly-concave testbed on weighted |<a_i,x>^2 - b_i|.

    f(x, y) = sum_i y_i |<a_i, x>^2 - b_i| - lam/2 |y|^2 with x in a box
    and y in [0, y_cap]^n (y_cap defaults to 1/n so the total weight mass
    is at most one). The weak-convexity modulus is the documented bound
    rho = 2 max_i ||a_i||^2, which holds for any feasible weight vector.
    The y-response is an exact coordinatewise clip; there is no exact
    x-response (the x-problem is nonconvex), but the primal function
    P(x) = max_y f(x, y) is continuously differentiable and its proximal
    centers are computed by a certified strongly convex box solve.
    """
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    if lam <= 0:
        raise ValueError("lam must be positive")
    if data is None:
        sensing, b = phase_retrieval_data(n_terms, dim_x, data_seed)
    else:
        sensing = np.asarray(data[0], dtype=np.float64)
        b = np.asarray(data[1], dtype=np.float64)
    if sensing.shape != (n_terms, dim_x) or b.shape != (n_terms,):
        raise ValueError("data must be (sensing (n, d), measurements (n,))")
    if sensing.size == 0:
        raise ValueError("data must be nonempty")
    n, d = sensing.shape
    cap = 1.0 / n if y_cap is None else float(y_cap)
    if cap <= 0:
        raise ValueError("y_cap must be positive")
    xb = float(x_bound)
    set_x = Box(-xb * np.ones(d), xb * np.ones(d))
    set_y = Box(np.zeros(n), cap * np.ones(n))

    row_sq = np.sum(sensing**2, axis=1)
    rho = 2.0 * float(np.max(row_sq)) if rho_override is None else float(rho_override)

    def residuals(x: Point) -> np.ndarray:
        return (sensing @ x) ** 2 - b

    def value(x: Point, y: Point) -> float:
        return float(y @ np.abs(residuals(x)) - 0.5 * lam * (y @ y))

    def grad_x(x: Point, y: Point) -> Point:
        ax = sensing @ x
        return sensing.T @ (y * np.sign(ax * ax - b) * 2.0 * ax)

    def grad_y(x: Point, y: Point) -> Point:
        return np.abs(residuals(x)) - lam * y

    def best_response_y(x: Point) -> Point:
        return np.clip(np.abs(residuals(x)) / lam, 0.0, cap)

    def primal_value(x: Point) -> float:
        phi = np.abs(residuals(x))
        inner = phi <= lam * cap
        vals = np.where(inner, phi**2 / (2.0 * lam), cap * phi - 0.5 * lam * cap**2)
        return float(np.sum(vals))

    def primal_grad(x: Point) -> Point:
        ax = sensing @ x
        w = np.clip((ax * ax - b) / lam, -cap, cap)
        return sensing.T @ (w * 2.0 * ax)

    def prox_saddle(center: Point, gamma: float) -> tuple[Point, Point]:
        center = as_point(center)
        if gamma <= rho:
            raise ValueError(f"gamma must exceed the weak-convexity modulus {rho}")

        def fun(x):
            diff = x - center
            return primal_value(x) + 0.5 * gamma * float(diff @ diff)

        def grad(x):
            return primal_grad(x) + gamma * (x - center)

        xs, _ = _minimize_strongly_convex_box(
            fun, grad, set_x.lower, set_x.upper, set_x.project(center), gamma - rho
        )
        return xs, best_response_y(xs)

    s_lin = np.abs(sensing) @ (xb * np.ones(d))  # max |<a_i, x>| over the box
    row_norm = np.sqrt(row_sq)
    per_term = 2.0 * s_lin * row_norm
    gmax_x = float(min(cap * np.sum(per_term), n * cap * np.max(per_term)))
    phi_max = np.maximum(b, np.abs(s_lin**2 - b))
    gmax_y = float(np.linalg.norm(phi_max) + lam * cap * math.sqrt(n))
    noise = NoiseModel(
        sigma=sigma,
        b1=math.sqrt(2.0 * (gmax_x**2 + sigma**2 * d)),
        b2=math.sqrt(2.0 * (gmax_y**2 + sigma**2 * n)),
        m1=math.sqrt(gmax_x**2 + sigma**2 * d),
        m2=math.sqrt(gmax_y**2 + sigma**2 * n),
    )

    exact = ExactOracles(
        best_response_x=None,
        best_response_y=best_response_y,
        saddle=None,
        primal_value=primal_value,
        primal_grad=primal_grad,
        x_closed_form=False,
        y_closed_form=True,
    )

    def regularize(center: Point, gamma: float) -> SaddleProblem:
        center = as_point(center)
        if gamma <= rho:
            raise ValueError(f"gamma must exceed the weak-convexity modulus {rho}")

        def reg_value(x: Point, y: Point) -> float:
            diff = x - center
            return value(x, y) + 0.5 * gamma * float(diff @ diff)

        def reg_grad_x(x: Point, y: Point) -> Point:
            return grad_x(x, y) + gamma * (x - center)

        return SaddleProblem(
            dim_x=d, dim_y=n, set_x=set_x, set_y=set_y,
            mu=gamma - rho, rho=0.0, lam=lam, noise=noise,
            value=reg_value, grad_x=reg_grad_x, grad_y=grad_y,
            exact=ExactOracles(
                best_response_x=None,
                best_response_y=best_response_y,
                x_closed_form=False,
                y_closed_form=True,
            ),
            name="phase_retrieval+prox",
        )

    return SaddleProblem(
        dim_x=d, dim_y=n, set_x=set_x, set_y=set_y,
        mu=0.0, rho=rho, lam=lam, noise=noise,
        value=value, grad_x=grad_x, grad_y=grad_y,
        exact=exact, regularize=regularize, prox_saddle=prox_saddle,
        quadratic=None,
        default_start=(set_x.project(xb * np.ones(d)), np.zeros(n)),
        name="phase_retrieval_wcsc",
    )
