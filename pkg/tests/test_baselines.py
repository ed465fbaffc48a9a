import numpy as np
import pytest

from epochsaddle import Constant, InvSqrt, default_step_rule, make_quadratic_scsc, run_pdsgd


def rng_for(seed):
    return np.random.Generator(np.random.Philox(seed))


def test_step_rules():
    assert Constant(0.5).at(10) == 0.5
    assert InvSqrt(2.0).at(3) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        Constant(0.0)
    with pytest.raises(ValueError):
        InvSqrt(-1.0)
    p = make_quadratic_scsc(2, 2, 2.0, 0.5)
    assert default_step_rule(p).c == pytest.approx(2.0)


def test_single_iteration_returns_start():
    p = make_quadratic_scsc(2, 2, 1.0, 1.0, sigma=1.0)
    x0 = np.array([0.7, -0.2])
    y0 = np.array([0.1, 0.4])
    xs, ys, trace = run_pdsgd(p, x0, y0, 1, Constant(0.5), rng_for(0))
    np.testing.assert_allclose(xs, x0)
    np.testing.assert_allclose(ys, y0)
    assert len(trace) == 1
    assert trace[0].iters_cumulative == 1


def test_hand_simulated_recursion():
    # decoupled quadratic with constant step 0.5: x averages to 7/12 at T = 3
    p = make_quadratic_scsc(1, 1, 1.0, 1.0)
    xs, _, _ = run_pdsgd(p, np.array([1.0]), np.array([0.0]), 3, Constant(0.5), rng_for(0))
    np.testing.assert_allclose(xs, [(1.0 + 0.5 + 0.25) / 3.0], rtol=1e-15)


def test_checkpoints_at_powers_of_two():
    p = make_quadratic_scsc(2, 2, 1.0, 1.0, sigma=0.5)
    _, _, trace = run_pdsgd(p, np.ones(2), np.ones(2), 100, InvSqrt(1.0), rng_for(1))
    marks = [r.iters_cumulative for r in trace]
    assert marks == [1, 2, 4, 8, 16, 32, 64, 100]
    assert all(r.gap is not None and r.gap >= 0 for r in trace)
    assert all(r.near_stationarity is None for r in trace)
    assert all(r.radius is None for r in trace)


def test_determinism():
    p = make_quadratic_scsc(3, 3, 1.0, 1.0, coupling=0.3 * np.eye(3), sigma=1.0)
    out1 = run_pdsgd(p, np.ones(3), np.ones(3), 500, InvSqrt(1.0), rng_for(11))
    out2 = run_pdsgd(p, np.ones(3), np.ones(3), 500, InvSqrt(1.0), rng_for(11))
    np.testing.assert_array_equal(out1[0], out2[0])
    np.testing.assert_array_equal(out1[1], out2[1])
    assert [r.gap for r in out1[2]] == [r.gap for r in out2[2]]


def test_iterate_feasibility_under_projection():
    from epochsaddle import Ball

    p = make_quadratic_scsc(
        2, 2, 1.0, 1.0, sigma=2.0,
        set_x=Ball(np.zeros(2), 1.0), set_y=Ball(np.zeros(2), 1.0),
    )
    xs, ys, trace = run_pdsgd(
        p, np.zeros(2), np.zeros(2), 300, Constant(0.5), rng_for(3), fast=False
    )
    assert p.set_x.contains(xs, 1e-9)
    assert p.set_y.contains(ys, 1e-9)


def test_rejects_bad_input():
    p = make_quadratic_scsc(2, 2, 1.0, 1.0)
    with pytest.raises(ValueError):
        run_pdsgd(p, np.zeros(2), np.zeros(2), 0, Constant(0.5), rng_for(0))
