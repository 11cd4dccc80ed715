import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clamm.errors import InconsistentObservationError
from clamm.reconstruction import (
    R_TOKEN0_SHARE,
    ObservedAdjustment,
    internal_price,
    reconstruct,
    solve_token0,
    solve_token1,
)
from clamm.tickmath import price_to_tick


def forward_amounts(L, price_lower, price_upper, price):
    """Independent forward oracle: balances of an in-range position.

    Internally consistent because substituting the token0 amount into the
    swap relation reproduces the token1 amount algebraically.
    """
    sp, sl, su = math.sqrt(price), math.sqrt(price_lower), math.sqrt(price_upper)
    return L * (su - sp) / (sp * su), L * (sp - sl)


def random_instance(rng):
    L = math.exp(rng.uniform(-3, 12))
    lower = math.exp(rng.uniform(-6, 6))
    upper = lower * math.exp(rng.uniform(0.005, 3.0))
    price = lower * (upper / lower) ** rng.uniform(0.01, 0.99)
    return L, lower, upper, price


def test_forward_oracle_round_trip_bulk():
    rng = random.Random(20210505)
    worst = 0.0
    for _ in range(2000):
        L, lower, upper, price = random_instance(rng)
        x_f, y_f = forward_amounts(L, lower, upper, price)
        obs = ObservedAdjustment(L, lower, upper, y_f / (x_f + y_f))
        state = reconstruct(obs)
        worst = max(
            worst,
            abs(state.token0 - x_f) / x_f,
            abs(state.token1 - y_f) / y_f,
            abs(state.price - price) / price,
        )
        assert state.tick == price_to_tick(state.price)
    assert worst < 1e-9


def test_solve_token1_at_zero_token0():
    obs = ObservedAdjustment(50.0, 0.25, 4.0, 0.5)
    assert solve_token1(0.0, obs) == pytest.approx(50.0 * (2.0 - 0.5), rel=1e-12)


def test_solve_token1_at_full_token0_is_zero():
    L, lower, upper = 80.0, 0.25, 4.0
    x_full = L * (math.sqrt(upper) - math.sqrt(lower)) / (math.sqrt(lower) * math.sqrt(upper))
    obs = ObservedAdjustment(L, lower, upper, 0.0)
    assert solve_token1(x_full, obs) == pytest.approx(0.0, abs=1e-12 * L)


def test_internal_price_boundary_substitutions():
    obs = ObservedAdjustment(80.0, 0.25, 4.0, 0.5)
    assert internal_price(0.0, obs) == pytest.approx(4.0, rel=1e-12)
    x_full = 80.0 * (math.sqrt(4.0) - math.sqrt(0.25)) / (math.sqrt(0.25) * math.sqrt(4.0))
    assert internal_price(x_full, obs) == pytest.approx(0.25, rel=1e-12)


def test_boundary_ratio_degeneracies_classified():
    obs_lower = ObservedAdjustment(10.0, 0.5, 2.0, 0.0)
    state = reconstruct(obs_lower)
    assert state.boundary == "lower"
    assert state.token1 == pytest.approx(0.0, abs=1e-12)
    assert state.price == pytest.approx(0.5, rel=1e-9)

    obs_upper = ObservedAdjustment(10.0, 0.5, 2.0, 1.0)
    state = reconstruct(obs_upper)
    assert state.boundary == "upper"
    assert state.token0 == 0.0
    assert state.price == pytest.approx(2.0, rel=1e-9)


def test_paper_style_adjustment_fixture():
    # an adjustment transferring 1 x TKN0 and 2 x TKN1: the token0 share
    # is 1/3, the token1 share 2/3. Only the token1-share reading solves
    # the printed radical back to the true state; the token0-share
    # reading is available behind the convention flag.
    L, lower, upper = 100.0, 0.5, 2.0
    lo, hi = lower * 1.001, upper * 0.999
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        x, y = forward_amounts(L, lower, upper, mid)
        if y < 2 * x:
            lo = mid
        else:
            hi = mid
    price = 0.5 * (lo + hi)
    x_true, y_true = forward_amounts(L, lower, upper, price)
    assert y_true / x_true == pytest.approx(2.0, rel=1e-9)

    glossary = reconstruct(ObservedAdjustment(L, lower, upper, 2.0 / 3.0))
    assert glossary.token0 == pytest.approx(x_true, rel=1e-9)

    text = reconstruct(
        ObservedAdjustment(L, lower, upper, 1.0 / 3.0), convention=R_TOKEN0_SHARE
    )
    assert text.token0 == pytest.approx(x_true, rel=1e-9)

    # feeding the token0 share under the default convention lands elsewhere
    mismatched = solve_token0(ObservedAdjustment(L, lower, upper, 1.0 / 3.0))
    assert abs(mismatched - x_true) / x_true > 1e-3


def test_scale_covariance():
    rng = random.Random(5)
    L, lower, upper, price = random_instance(rng)
    x_f, y_f = forward_amounts(L, lower, upper, price)
    r = y_f / (x_f + y_f)
    base = reconstruct(ObservedAdjustment(L, lower, upper, r))
    scaled = reconstruct(ObservedAdjustment(7.0 * L, lower, upper, r))
    assert scaled.token0 == pytest.approx(7.0 * base.token0, rel=1e-9)
    assert scaled.token1 == pytest.approx(7.0 * base.token1, rel=1e-9)
    assert scaled.price == pytest.approx(base.price, rel=1e-12)
    assert scaled.tick == base.tick


def test_monotonicity_across_the_range():
    L, lower, upper = 40.0, 0.5, 2.0
    xs, ys = [], []
    for frac in [0.05, 0.2, 0.4, 0.6, 0.8, 0.95]:
        price = lower * (upper / lower) ** frac
        x_f, y_f = forward_amounts(L, lower, upper, price)
        state = reconstruct(ObservedAdjustment(L, lower, upper, y_f / (x_f + y_f)))
        xs.append(state.token0)
        ys.append(state.token1)
    assert all(a > b for a, b in zip(xs, xs[1:]))  # token0 strictly decreasing
    assert all(a < b for a, b in zip(ys, ys[1:]))  # token1 strictly increasing


@given(
    st.floats(min_value=0.01, max_value=1e6),
    st.floats(min_value=0.01, max_value=100.0),
    st.floats(min_value=1.02, max_value=50.0),
    st.floats(min_value=0.02, max_value=0.98),
)
@settings(max_examples=200, deadline=None)
def test_round_trip_property(L, lower, spread, frac):
    upper = lower * spread
    price = lower * spread**frac
    x_f, y_f = forward_amounts(L, lower, upper, price)
    state = reconstruct(ObservedAdjustment(L, lower, upper, y_f / (x_f + y_f)))
    assert state.token0 == pytest.approx(x_f, rel=1e-8, abs=1e-12)
    assert state.price == pytest.approx(price, rel=1e-8)


def test_observation_validation():
    with pytest.raises(ValueError):
        ObservedAdjustment(-1.0, 0.5, 2.0, 0.5)
    with pytest.raises(ValueError):
        ObservedAdjustment(1.0, 2.0, 0.5, 0.5)  # inverted prices
    with pytest.raises(ValueError):
        ObservedAdjustment(1.0, 2.0, 2.0, 0.5)  # not distinct
    with pytest.raises(ValueError):
        ObservedAdjustment(1.0, 0.5, 2.0, 1.5)  # ratio outside [0, 1]
    with pytest.raises(ValueError):
        reconstruct(ObservedAdjustment(1.0, 0.5, 2.0, 0.5), convention="sideways")


def test_inconsistency_error_type_exists():
    assert issubclass(InconsistentObservationError, Exception)
