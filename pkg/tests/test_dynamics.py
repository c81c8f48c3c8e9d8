import math
from dataclasses import replace

import numpy as np
import pytest

from mmsim.dynamics import (
    MOArrivals,
    PathState,
    RngStream,
    round_to_tick,
    sample_mo_arrivals,
    simulate_synthetic_path,
    step_alpha,
    step_midprice,
)
from mmsim.params import default_params

NO_ARRIVALS = MOArrivals()


def test_rng_stream_replays_identically():
    a = RngStream(seed=123, stream_id=4).generator().random(100)
    b = RngStream(seed=123, stream_id=4).generator().random(100)
    assert np.array_equal(a, b)
    c = RngStream(seed=123, stream_id=5).generator().random(100)
    assert not np.array_equal(a, c)


def test_zero_intensity_never_arrives():
    gen = RngStream(seed=0).generator()
    for _ in range(1000):
        assert not sample_mo_arrivals(0.0, 0.0, 1.0, gen).buy


def test_arrival_probability_matches_thinning_formula():
    lam = 0.5833
    expected = 1.0 - math.exp(-lam)
    assert expected == pytest.approx(0.4419, abs=5e-4)
    gen = RngStream(seed=7).generator()
    n = 100_000
    hits = sum(sample_mo_arrivals(lam, lam, 1.0, gen).buy for _ in range(n))
    assert hits / n == pytest.approx(expected, abs=0.01)


def test_symmetric_intensities_give_matching_frequencies():
    lam = 0.5833
    gen = RngStream(seed=11).generator()
    n = 100_000
    buys = sells = 0
    for _ in range(n):
        arr = sample_mo_arrivals(lam, lam, 1.0, gen)
        buys += arr.buy
        sells += arr.sell
    assert abs(buys - sells) / n < 0.01


def test_alpha_step_deterministic_cases():
    p = replace(default_params(), eta=0.0)
    gen = RngStream(seed=0).generator()
    assert step_alpha(0.01, NO_ARRIVALS, 1.0, p, gen) == pytest.approx(0.0095, rel=1e-12)
    assert step_alpha(0.0, MOArrivals(buy=True), 1.0, p, gen) == pytest.approx(0.002, rel=1e-12)
    assert step_alpha(0.0, NO_ARRIVALS, 1.0, p, gen) == 0.0
    assert step_alpha(0.0, MOArrivals(sell=True), 1.0, p, gen) == pytest.approx(-0.002, rel=1e-12)


def test_midprice_step_deterministic_cases():
    p = replace(default_params(), sigma=0.0)
    gen = RngStream(seed=0).generator()
    assert step_midprice(100.0, 0.001, 1.0, p, gen) == pytest.approx(100.001, rel=1e-12)
    assert step_midprice(100.0, 0.0, 1.0, p, gen) == 100.0


def test_midprice_increment_variance():
    p = default_params()
    gen = RngStream(seed=3).generator()
    n = 100_000
    increments = np.array([step_midprice(100.0, 0.0, 1.0, p, gen) - 100.0 for _ in range(n)])
    assert increments.var() == pytest.approx(2.5e-5, rel=0.05)


def test_midprice_tick_rounding():
    p = replace(default_params(), sigma=0.0)
    gen = RngStream(seed=0).generator()
    assert step_midprice(100.0, 0.004, 1.0, p, gen, tick=0.01) == 100.0
    assert step_midprice(100.0, 0.006, 1.0, p, gen, tick=0.01) == 100.01


def test_round_to_tick_is_canonical():
    assert round_to_tick(8186 * 0.01, 0.01) == 81.86
    assert round_to_tick(81.8649, 0.01) == 81.86
    assert round_to_tick(81.8651, 0.01) == 81.87


def test_degenerate_path_is_constant():
    p = replace(default_params(), sigma=0.0, eta=0.0, lambda_plus=0.0, lambda_minus=0.0)
    path = simulate_synthetic_path(p, 50, RngStream(seed=9))
    assert np.all(path.mid == path.mid[0])
    assert np.all(path.bid == path.bid[0])
    assert np.all(path.ask == path.ask[0])


def test_path_has_fixed_spread_and_shapes():
    p = default_params()
    path = simulate_synthetic_path(p, 200, RngStream(seed=5))
    assert path.mid.shape == (201,)
    assert path.buy_arrivals.shape == (200,)
    assert np.allclose(path.ask - path.bid, p.delta, atol=1e-9)


def test_path_is_deterministic_per_stream():
    p = default_params()
    a = simulate_synthetic_path(p, 100, RngStream(seed=21, stream_id=2))
    b = simulate_synthetic_path(p, 100, RngStream(seed=21, stream_id=2))
    assert np.array_equal(a.mid, b.mid)
    assert np.array_equal(a.alpha, b.alpha)
    assert np.array_equal(a.buy_arrivals, b.buy_arrivals)


def test_path_rejects_empty():
    with pytest.raises(ValueError):
        simulate_synthetic_path(default_params(), 0, RngStream(seed=0))


def test_path_state_accessor():
    path = simulate_synthetic_path(default_params(), 20, RngStream(seed=1))
    state = path.state(5)
    assert state == PathState(s=float(path.mid[5]), alpha=float(path.alpha[5]), t_index=5)
    assert math.isfinite(state.s) and math.isfinite(state.alpha)


def test_alpha_lag1_autocorrelation_matches_mean_reversion():
    p = replace(default_params(), lambda_plus=0.0, lambda_minus=0.0)
    path = simulate_synthetic_path(p, 100_000, RngStream(seed=13), tick=None)
    a = path.alpha
    corr = np.corrcoef(a[:-1], a[1:])[0, 1]
    assert corr == pytest.approx(math.exp(-p.zeta * p.dt), abs=0.02)


def test_alpha_mean_near_zero_under_symmetry():
    p = default_params()
    path = simulate_synthetic_path(p, 100_000, RngStream(seed=17), tick=None)
    a = path.alpha
    # standard error of an AR(1) sample mean: the naive one understates it
    # by sqrt((1+r)/(1-r)) at autocorrelation r
    r = math.exp(-p.zeta * p.dt)
    se = a.std(ddof=1) / math.sqrt(a.size) * math.sqrt((1 + r) / (1 - r))
    assert abs(a.mean()) < 3 * se


def test_alpha_jumps_follow_arrivals():
    p = replace(default_params(), eta=0.0, sigma=0.0)
    path = simulate_synthetic_path(p, 500, RngStream(seed=23))
    for i in range(500):
        expected = path.alpha[i] * (1 - p.zeta * p.dt)
        if path.buy_arrivals[i]:
            expected += p.eps_plus
        if path.sell_arrivals[i]:
            expected -= p.eps_minus
        assert path.alpha[i + 1] == pytest.approx(expected, abs=1e-15)
