"""Fast compiled paths must match the generic python paths."""

import numpy as np

from epochsaddle import (
    Ball,
    Constant,
    EpochState,
    InvSqrt,
    make_quadratic_scsc,
    run_epoch_scsc,
    run_pdsgd,
)


def rng_for(seed):
    return np.random.Generator(np.random.Philox(seed))


def ball_problem(dim, sigma):
    rng = rng_for(100 + dim)
    A = 0.4 * rng.standard_normal((dim, dim))
    return make_quadratic_scsc(
        dim, dim, 1.0, 0.7, coupling=A, b=0.1 * rng.standard_normal(dim), sigma=sigma,
        set_x=Ball(np.zeros(dim), 1.5), set_y=Ball(np.zeros(dim), 1.5),
    )


def test_epoch_fast_matches_generic():
    for dim in (2, 5):
        for sigma in (0.0, 0.6):
            p = ball_problem(dim, sigma)
            x0 = p.set_x.project(np.ones(dim))
            y0 = p.set_y.project(-np.ones(dim))
            st_fast = run_epoch_scsc(
                p, EpochState(1, x0, y0), 0.02, 0.02, 1.0, 700, rng_for(7), fast=True
            )
            st_gen = run_epoch_scsc(
                p, EpochState(1, x0, y0), 0.02, 0.02, 1.0, 700, rng_for(7), fast=False
            )
            assert np.max(np.abs(st_fast.avg_x - st_gen.avg_x)) < 1e-11
            assert np.max(np.abs(st_fast.avg_y - st_gen.avg_y)) < 1e-11


def test_epoch_fast_matches_generic_whole_space():
    p = make_quadratic_scsc(3, 3, 1.0, 1.0, coupling=0.3 * np.eye(3), sigma=0.4)
    x0 = np.ones(3)
    y0 = -np.ones(3)
    st_fast = run_epoch_scsc(p, EpochState(1, x0, y0), 0.05, 0.05, 2.0, 500, rng_for(9), fast=True)
    st_gen = run_epoch_scsc(p, EpochState(1, x0, y0), 0.05, 0.05, 2.0, 500, rng_for(9), fast=False)
    assert np.max(np.abs(st_fast.avg_x - st_gen.avg_x)) < 1e-11
    assert np.max(np.abs(st_fast.avg_y - st_gen.avg_y)) < 1e-11


def test_pdsgd_fast_matches_generic():
    for rule in (Constant(0.05), InvSqrt(0.3)):
        p = ball_problem(3, 0.5)
        x0 = p.set_x.project(np.ones(3))
        y0 = p.set_y.project(np.ones(3))
        ff = run_pdsgd(p, x0, y0, 600, rule, rng_for(13), fast=True)
        gg = run_pdsgd(p, x0, y0, 600, rule, rng_for(13), fast=False)
        assert np.max(np.abs(ff[0] - gg[0])) < 1e-11
        assert np.max(np.abs(ff[1] - gg[1])) < 1e-11
        gaps_f = [r.gap for r in ff[2]]
        gaps_g = [r.gap for r in gg[2]]
        np.testing.assert_allclose(gaps_f, gaps_g, rtol=1e-9, atol=1e-12)


def test_noise_stream_is_chunk_order_invariant():
    # drawing one (n, d) block consumes the same stream as the solver's
    # chunked protocol with a chunk boundary in the middle
    from epochsaddle.scsc import _noise_block

    r1 = rng_for(3)
    full = _noise_block(r1, 10, 4, 1.0)
    r2 = rng_for(3)
    a = _noise_block(r2, 10, 4, 1.0)
    np.testing.assert_array_equal(full, a)
