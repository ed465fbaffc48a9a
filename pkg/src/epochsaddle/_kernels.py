"""Compiled inner loops for quadratic testbeds on whole-space/ball sets.

These mirror the generic python update loops operation for operation so
that a run only differs from the generic path by floating-point summation
order inside dot products. Set kinds: 0 = whole space, 1 = ball, 2 = box
(box only where no epoch ball applies).
"""

from __future__ import annotations

import numpy as np
from numba import njit

KIND_WHOLE = 0
KIND_BALL = 1
KIND_BOX = 2


@njit(cache=True, nogil=True, inline="always")
def _norm_diff(p, c):
    s = 0.0
    for j in range(p.size):
        d = p[j] - c[j]
        s += d * d
    return np.sqrt(s)


@njit(cache=True, nogil=True)
def _proj_ball_inplace(p, c, r, out):
    d = _norm_diff(p, c)
    if d <= r:
        for j in range(p.size):
            out[j] = p[j]
    else:
        scale = r / d
        for j in range(p.size):
            out[j] = c[j] + (p[j] - c[j]) * scale


@njit(cache=True, nogil=True)
def _proj_ball_ball_inplace(p, c1, r1, c2, r2, out):
    d1 = _norm_diff(p, c1)
    d2 = _norm_diff(p, c2)
    if d1 <= r1 and d2 <= r2:
        for j in range(p.size):
            out[j] = p[j]
        return
    if d1 > r1:
        scale = r1 / d1
        ok = True
        s = 0.0
        for j in range(p.size):
            q = c1[j] + (p[j] - c1[j]) * scale
            d = q - c2[j]
            s += d * d
        if np.sqrt(s) <= r2:
            for j in range(p.size):
                out[j] = c1[j] + (p[j] - c1[j]) * scale
            return
    scale = r2 / d2
    s = 0.0
    for j in range(p.size):
        q = c2[j] + (p[j] - c2[j]) * scale
        d = q - c1[j]
        s += d * d
    if np.sqrt(s) <= r1:
        for j in range(p.size):
            out[j] = c2[j] + (p[j] - c2[j]) * scale
        return
    # both constraints active: point on the sphere-sphere circle
    d = _norm_diff(c2, c1)
    if d < 1e-15:
        r = min(r1, r2)
        scale = r / d1
        for j in range(p.size):
            out[j] = c1[j] + (p[j] - c1[j]) * scale
        return
    alpha = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    h2 = r1 * r1 - alpha * alpha
    h = np.sqrt(h2) if h2 > 0.0 else 0.0
    beta = 0.0
    for j in range(p.size):
        beta += (p[j] - c1[j]) * (c2[j] - c1[j]) / d
    nw = 0.0
    for j in range(p.size):
        w = (p[j] - c1[j]) - beta * (c2[j] - c1[j]) / d
        nw += w * w
    nw = np.sqrt(nw)
    if nw > 1e-15:
        for j in range(p.size):
            u = (c2[j] - c1[j]) / d
            w = (p[j] - c1[j]) - beta * u
            out[j] = c1[j] + alpha * u + h * (w / nw)
    else:
        jmin = 0
        best = abs(c2[0] - c1[0])
        for j in range(1, p.size):
            v = abs(c2[j] - c1[j])
            if v < best:
                best = v
                jmin = j
        dot = (c2[jmin] - c1[jmin]) / d
        vn = 0.0
        for j in range(p.size):
            u = (c2[j] - c1[j]) / d
            e = 1.0 if j == jmin else 0.0
            w = e - dot * u
            vn += w * w
        vn = np.sqrt(vn)
        for j in range(p.size):
            u = (c2[j] - c1[j]) / d
            e = 1.0 if j == jmin else 0.0
            out[j] = c1[j] + alpha * u + h * ((e - dot * u) / vn)


@njit(cache=True, nogil=True)
def _proj_set_inplace(p, kind, lo_or_center, hi, ball_r, out):
    if kind == KIND_WHOLE:
        for j in range(p.size):
            out[j] = p[j]
    elif kind == KIND_BALL:
        _proj_ball_inplace(p, lo_or_center, ball_r, out)
    else:
        for j in range(p.size):
            v = p[j]
            if v < lo_or_center[j]:
                v = lo_or_center[j]
            elif v > hi[j]:
                v = hi[j]
            out[j] = v


@njit(cache=True, nogil=True)
def quad_scsc_epoch(
    x, y, sum_x, sum_y,
    A, At, b, c, mu, lam,
    eta_x, eta_y,
    noise_x, noise_y,
    cx, cy, radius,
    kx, kx_center, kx_r,
    ky, ky_center, ky_r,
):
    """One chunk of projected descent/ascent on the quadratic objective.

    Iterates are updated in place; running sums accumulate the iterates
    seen at the START of each step (so a full epoch averages t = 0..T-1).
    """
    T = noise_x.shape[0]
    dx = x.size
    dy = y.size
    gx = np.empty(dx)
    gy = np.empty(dy)
    px = np.empty(dx)
    py = np.empty(dy)
    for t in range(T):
        for j in range(dx):
            sum_x[j] += x[j]
        for i in range(dy):
            sum_y[i] += y[i]
        for j in range(dx):
            s = mu * x[j] + b[j] + noise_x[t, j]
            for i in range(dy):
                s += A[j, i] * y[i]
            gx[j] = s
        for i in range(dy):
            s = -c[i] - lam * y[i] + noise_y[t, i]
            for j in range(dx):
                s += At[i, j] * x[j]
            gy[i] = s
        for j in range(dx):
            px[j] = x[j] - eta_x * gx[j]
        for i in range(dy):
            py[i] = y[i] + eta_y * gy[i]
        if kx == KIND_WHOLE:
            _proj_ball_inplace(px, cx, radius, x)
        else:
            _proj_ball_ball_inplace(px, kx_center, kx_r, cx, radius, x)
        if ky == KIND_WHOLE:
            _proj_ball_inplace(py, cy, radius, y)
        else:
            _proj_ball_ball_inplace(py, ky_center, ky_r, cy, radius, y)


@njit(cache=True, nogil=True)
def quad_pdsgd_chunk(
    x, y, sum_x, sum_y,
    A, At, b, c, mu, lam,
    steps_x, steps_y,
    noise_x, noise_y,
    kx, kx_center, kx_hi, kx_r,
    ky, ky_center, ky_hi, ky_r,
):
    """One chunk of plain projected descent/ascent (feasible sets only)."""
    T = noise_x.shape[0]
    dx = x.size
    dy = y.size
    gx = np.empty(dx)
    gy = np.empty(dy)
    px = np.empty(dx)
    py = np.empty(dy)
    for t in range(T):
        for j in range(dx):
            sum_x[j] += x[j]
        for i in range(dy):
            sum_y[i] += y[i]
        for j in range(dx):
            s = mu * x[j] + b[j] + noise_x[t, j]
            for i in range(dy):
                s += A[j, i] * y[i]
            gx[j] = s
        for i in range(dy):
            s = -c[i] - lam * y[i] + noise_y[t, i]
            for j in range(dx):
                s += At[i, j] * x[j]
            gy[i] = s
        for j in range(dx):
            px[j] = x[j] - steps_x[t] * gx[j]
        for i in range(dy):
            py[i] = y[i] + steps_y[t] * gy[i]
        _proj_set_inplace(px, kx, kx_center, kx_hi, kx_r, x)
        _proj_set_inplace(py, ky, ky_center, ky_hi, ky_r, y)
