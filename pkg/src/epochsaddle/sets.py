"""Convex feasible sets and Euclidean projections.

Iterates are plain 1-D float64 numpy arrays. Four set kinds cover the
testbeds: the whole space, axis-aligned boxes, Euclidean balls, and the
probability simplex. ``project_intersection`` performs the per-iteration
projection onto ``set ∩ B(center, radius)`` that epoch-restarted solvers
need: closed form where one exists (pure ball, ball-ball), Dykstra's
alternating scheme otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Point = np.ndarray

FEASIBILITY_TOL = 1e-9

_DYKSTRA_TOL = 1e-10
_DYKSTRA_MAX_SWEEPS = 10_000


class ProjectionError(RuntimeError):
    """Alternating projection did not converge within the sweep cap.

    Carries the last iterate and the final successive-change residual.
    """

    def __init__(self, message: str, last_iterate: Point, residual: float):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


def as_point(coords) -> Point:
    """Coerce to a finite 1-D float64 vector, raising on bad input."""
    p = np.asarray(coords, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"point must be a nonempty 1-D vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    return p


class ConvexSet:
    """Base class for closed convex feasible regions."""

    dim: int

    def project(self, p: Point) -> Point:
        raise NotImplementedError

    def contains(self, p: Point, tol: float = FEASIBILITY_TOL) -> bool:
        raise NotImplementedError

    def bound_norm(self) -> float | None:
        """Largest Euclidean norm over the set, or None if unbounded."""
        raise NotImplementedError

    def _check_dim(self, p: Point) -> Point:
        p = np.asarray(p, dtype=np.float64)
        if p.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: set has dim {self.dim}, point has shape {p.shape}")
        return p


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexSet):
    """Unconstrained feasible region in R^dim."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")

    def project(self, p: Point) -> Point:
        return self._check_dim(p).copy()

    def contains(self, p: Point, tol: float = FEASIBILITY_TOL) -> bool:
        self._check_dim(p)
        return True

    def bound_norm(self) -> float | None:
        return None


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    """Axis-aligned box {x : lower <= x <= upper} (componentwise)."""

    lower: Point
    upper: Point

    def __post_init__(self):
        lo = as_point(self.lower)
        hi = as_point(self.upper)
        if lo.shape != hi.shape:
            raise ValueError("lower and upper must have the same shape")
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def project(self, p: Point) -> Point:
        return np.clip(self._check_dim(p), self.lower, self.upper)

    def contains(self, p: Point, tol: float = FEASIBILITY_TOL) -> bool:
        p = self._check_dim(p)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def bound_norm(self) -> float | None:
        return float(np.sqrt(np.sum(np.maximum(self.lower**2, self.upper**2))))


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    """Euclidean ball {x : ||x - center|| <= radius}."""

    center: Point
    radius: float

    def __post_init__(self):
        c = as_point(self.center)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return self.center.size

    def project(self, p: Point) -> Point:
        p = self._check_dim(p)
        return _project_ball(p, self.center, self.radius)

    def contains(self, p: Point, tol: float = FEASIBILITY_TOL) -> bool:
        p = self._check_dim(p)
        return bool(np.linalg.norm(p - self.center) <= self.radius + tol)

    def bound_norm(self) -> float | None:
        return float(np.linalg.norm(self.center) + self.radius)


@dataclass(frozen=True, eq=False)
class Simplex(ConvexSet):
    """Probability simplex {x : x >= 0, sum(x) = 1} in R^dim."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")

    def project(self, p: Point) -> Point:
        return _project_simplex(self._check_dim(p))

    def contains(self, p: Point, tol: float = FEASIBILITY_TOL) -> bool:
        p = self._check_dim(p)
        return bool(np.all(p >= -tol) and abs(float(np.sum(p)) - 1.0) <= tol)

    def bound_norm(self) -> float | None:
        return 1.0


def _project_ball(p: Point, center: Point, radius: float) -> Point:
    d = float(np.linalg.norm(p - center))
    if d <= radius:
        return p.copy()
    return center + (p - center) * (radius / d)


def _project_simplex(v: Point) -> Point:
    # Sort-based exact algorithm, O(d log d).
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u * idx > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _project_ball_ball(p: Point, c1: Point, r1: float, c2: Point, r2: float) -> Point:
    """Exact projection onto the intersection of two balls.

    Requires a nonempty intersection; callers guarantee c2 lies in the
    first ball. Falls back to the sphere-sphere circle only when both
    constraints are active at the optimum.
    """
    d1 = float(np.linalg.norm(p - c1))
    d2 = float(np.linalg.norm(p - c2))
    if d1 <= r1 and d2 <= r2:
        return p.copy()
    if d1 > r1:
        q = c1 + (p - c1) * (r1 / d1)
        if np.linalg.norm(q - c2) <= r2:
            return q
    q = c2 + (p - c2) * (r2 / d2)
    if np.linalg.norm(q - c1) <= r1:
        return q
    dc = c2 - c1
    d = float(np.linalg.norm(dc))
    if d < 1e-15:
        r = min(r1, r2)
        return c1 + (p - c1) * (r / d1)
    u = dc / d
    alpha = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    h = float(np.sqrt(max(r1 * r1 - alpha * alpha, 0.0)))
    pc = p - c1
    beta = float(pc @ u)
    w = pc - beta * u
    nw = float(np.linalg.norm(w))
    if nw > 1e-15:
        v = w / nw
    else:
        # p sits on the axis through both centers: pick a deterministic
        # unit direction orthogonal to u.
        j = int(np.argmin(np.abs(u)))
        e = np.zeros_like(u)
        e[j] = 1.0
        v = e - (e @ u) * u
        v = v / np.linalg.norm(v)
    return c1 + alpha * u + h * v


def _dykstra(p: Point, proj_a, proj_b) -> Point:
    """Dykstra's alternating projection onto the intersection of two sets.

    Stops on the full fixed-point residual: both the successive change of
    the B-feasible iterate and its distance to the A-feasible iterate
    must vanish (the successive change alone can stall transiently while
    the correction increments still move).
    """
    x = p.copy()
    pinc = np.zeros_like(p)
    qinc = np.zeros_like(p)
    residual = np.inf
    for _ in range(_DYKSTRA_MAX_SWEEPS):
        y = proj_a(x + pinc)
        pinc = x + pinc - y
        x_new = proj_b(y + qinc)
        qinc = y + qinc - x_new
        residual = max(float(np.linalg.norm(x_new - x)), float(np.linalg.norm(y - x_new)))
        x = x_new
        if residual <= _DYKSTRA_TOL:
            return x
    raise ProjectionError(
        f"Dykstra did not converge within {_DYKSTRA_MAX_SWEEPS} sweeps (residual {residual:.3e})",
        last_iterate=x,
        residual=residual,
    )


def project(s: ConvexSet, p: Point) -> Point:
    """Euclidean projection of p onto s."""
    return s.project(np.asarray(p, dtype=np.float64))


def project_intersection(s: ConvexSet, center: Point, radius: float, p: Point) -> Point:
    """Euclidean projection of p onto s ∩ B(center, radius).

    Exact closed forms are used when s is the whole space (pure ball
    projection) or a ball (two-ball projection); otherwise the shortcut
    "set projection already inside the ball" is tried before running
    Dykstra's algorithm. The ball center must be feasible for s, which
    epoch-restarted solvers guarantee because centers are feasible
    averages.
    """
    p = np.asarray(p, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    if p.shape != (s.dim,) or center.shape != (s.dim,):
        raise ValueError(f"dimension mismatch: set dim {s.dim}, point {p.shape}, center {center.shape}")
    radius = float(radius)
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if isinstance(s, WholeSpace):
        return _project_ball(p, center, radius)
    if isinstance(s, Ball):
        return _project_ball_ball(p, s.center, s.radius, center, radius)
    if s.contains(p, 0.0) and np.linalg.norm(p - center) <= radius:
        return p.copy()
    q = s.project(p)
    if np.linalg.norm(q - center) <= radius:
        return q
    return _dykstra(p, s.project, lambda z: _project_ball(z, center, radius))
