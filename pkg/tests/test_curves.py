import math
from decimal import Decimal, getcontext

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clamm.curves import (
    Holdings,
    RangeBounds,
    clamm_holdings,
    clamm_value,
    cpamm_il,
    cpamm_value,
    geometric_mean_price,
    hodl_value,
    leverage_requirements,
    liquidity_notional,
)

ratios = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)


def high_precision_sqrt(x: float) -> float:
    getcontext().prec = 50
    return float(Decimal(x).sqrt())


# ----- hodl / constant-product values ---------------------------------------


def test_hodl_value_entry_normalization():
    assert hodl_value(1.0, Holdings(1, 1)) == 2.0


def test_hodl_value_linear():
    assert hodl_value(0.8, Holdings(1, 1)) == pytest.approx(1.8)


def test_hodl_goes_50x_when_pool_goes_10x():
    # 100x price move: HODL worth 101 = 50.5x the entry value of 2,
    # the pool worth 20 = 10x entry.
    assert hodl_value(100.0, Holdings(1, 1)) == pytest.approx(101.0)
    assert hodl_value(100.0, Holdings(1, 1)) / 2.0 == pytest.approx(50.5)
    assert cpamm_value(100.0) == pytest.approx(20.0)
    assert cpamm_value(100.0) / 2.0 == pytest.approx(10.0)


def test_cpamm_value_entry():
    assert cpamm_value(1.0) == 2.0


def test_cpamm_value_against_high_precision_sqrt():
    assert cpamm_value(0.8) == pytest.approx(2 * high_precision_sqrt(0.8), rel=1e-12)
    assert cpamm_value(0.8) == pytest.approx(1.788854, abs=1e-6)


def test_cpamm_il_worked_values():
    assert cpamm_il(0.8) == pytest.approx(-0.005573, abs=1e-6)
    assert cpamm_il(1.2) == pytest.approx(-0.004555, abs=1e-6)
    assert cpamm_il(1.0) == 0.0


def test_cpamm_il_100x_move_is_40_and_a_half_times_entry():
    # (20 - 101) / 2 per unit of initial investment
    assert cpamm_il(100.0) == pytest.approx(-40.5)


@given(ratios)
def test_cpamm_il_nonpositive(x):
    assert cpamm_il(x) <= 0.0


@given(st.floats(min_value=1e-6, max_value=1e6).filter(lambda x: abs(x - 1) > 1e-9))
def test_cpamm_il_strictly_negative_away_from_entry(x):
    assert cpamm_il(x) < 0.0


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_nonpositive_ratio_rejected(bad):
    for fn in (cpamm_value, cpamm_il):
        with pytest.raises(ValueError):
            fn(bad)
    with pytest.raises(ValueError):
        hodl_value(bad, Holdings(1, 1))


# ----- geometric mean --------------------------------------------------------


def test_geometric_mean_worked_example():
    assert geometric_mean_price(100, 110) == pytest.approx(104.8809, abs=1e-4)


def test_geometric_mean_no_move():
    assert geometric_mean_price(42.0, 42.0) == 42.0


def test_geometric_mean_is_range_conversion_ratio():
    bounds = RangeBounds(0.8, 1.2)
    assert geometric_mean_price(0.8, 1.2) == pytest.approx(bounds.conversion_ratio)


@given(ratios, ratios)
def test_geometric_mean_between(a, b):
    g = geometric_mean_price(a, b)
    if a != b:
        assert min(a, b) < g < max(a, b)
    assert g == geometric_mean_price(b, a)


def test_geometric_mean_rejects_nonpositive():
    with pytest.raises(ValueError):
        geometric_mean_price(0.0, 1.0)


# ----- range-bounded value and holdings --------------------------------------


def test_clamm_value_branches():
    bounds = RangeBounds(0.8, 1.2)
    assert clamm_value(0.5, bounds, n0=3.0) == pytest.approx(1.5)  # n0 * x
    assert clamm_value(2.0, bounds, n0=3.0) == pytest.approx(3.0 * math.sqrt(0.96))


def test_clamm_virtual_pool_decomposition():
    # In range, the position equals a virtual constant-product pool of
    # value 2*L*sqrt(x) minus a fixed side portfolio (L/sqrt(x1) risk
    # units and L*sqrt(x0) numeraire), so a 100-liquidity position over
    # 0.8..1.2 rides a virtual pool worth 200 at entry and 200*sqrt(0.8)
    # at the lower bound.
    L = 100.0
    bounds = RangeBounds(0.8, 1.2)
    n0 = liquidity_notional(L, bounds)
    for x in (0.8, 0.9, 1.0, 1.1, 1.2):
        virtual = 2 * L * math.sqrt(x)
        side = (L / math.sqrt(1.2)) * x + L * math.sqrt(0.8)
        assert clamm_value(x, bounds, n0) == pytest.approx(virtual - side, rel=1e-12)
    assert 2 * L * math.sqrt(0.8) == pytest.approx(178.885, abs=1e-3)
    assert L * math.sqrt(0.8) == pytest.approx(89.44, abs=5e-3)


def test_clamm_value_boundary_continuity():
    bounds = RangeBounds(0.8, 1.2)
    eps = 1e-10
    assert clamm_value(0.8, bounds) == pytest.approx(clamm_value(0.8 - eps, bounds), rel=1e-8)
    assert clamm_value(1.2, bounds) == pytest.approx(clamm_value(1.2 + eps, bounds), rel=1e-8)


def test_clamm_holdings_outside_range():
    bounds = RangeBounds(0.8, 1.2)
    below = clamm_holdings(0.5, bounds, n0=2.0)
    assert below.risk == 2.0 and below.numeraire == 0.0
    above = clamm_holdings(3.0, bounds, n0=2.0)
    assert above.risk == 0.0
    assert above.numeraire == pytest.approx(2.0 * math.sqrt(0.96))


@given(
    st.floats(min_value=0.05, max_value=20.0),
    st.floats(min_value=0.05, max_value=0.95),
    st.floats(min_value=1.05, max_value=20.0),
    st.floats(min_value=0.01, max_value=100.0),
)
def test_value_identity(x, lower_scale, upper_scale, n0):
    bounds = RangeBounds(lower_scale, lower_scale * upper_scale / 0.05)
    h = clamm_holdings(x, bounds, n0)
    v = clamm_value(x, bounds, n0)
    assert h.numeraire + x * h.risk == pytest.approx(v, rel=1e-12, abs=1e-15)


@given(
    st.floats(min_value=0.05, max_value=20.0),
    st.floats(min_value=0.05, max_value=20.0),
)
def test_clamm_value_monotone(a, b):
    bounds = RangeBounds(0.7, 1.4)
    lo, hi = sorted((a, b))
    assert clamm_value(lo, bounds) <= clamm_value(hi, bounds) * (1 + 1e-12)


def test_v2_limit_recovery():
    bounds = RangeBounds(1e-12, 1e12)
    n0 = 1.0 / math.sqrt(1e-12)
    for x in (0.5, 1.0, 2.0):
        assert clamm_value(x, bounds, n0) == pytest.approx(cpamm_value(x), rel=1e-5)


@given(
    st.floats(min_value=0.2, max_value=0.95),
    st.floats(min_value=1.05, max_value=5.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_in_range_il_nonpositive(lower, upper, entry_frac, close_frac):
    # a range position never beats HODLing its own entry composition
    bounds = RangeBounds(lower, upper)
    entry = lower + (upper - lower) * entry_frac
    close = lower + (upper - lower) * close_frac
    entry_holdings = clamm_holdings(entry, bounds)
    il = clamm_value(close, bounds) - hodl_value(close, entry_holdings)
    assert il <= 1e-12


def test_in_range_il_zero_only_at_entry():
    bounds = RangeBounds(0.8, 1.2)
    entry = 1.05
    entry_holdings = clamm_holdings(entry, bounds)
    at_entry = clamm_value(entry, bounds) - hodl_value(entry, entry_holdings)
    assert at_entry == pytest.approx(0.0, abs=1e-15)
    away = clamm_value(0.9, bounds) - hodl_value(0.9, entry_holdings)
    assert away < -1e-6


def test_invalid_range_rejected():
    with pytest.raises(ValueError):
        RangeBounds(1.2, 0.8)
    with pytest.raises(ValueError):
        RangeBounds(0.0, 1.0)


# ----- leverage ---------------------------------------------------------------


def test_leverage_80_120():
    profile = leverage_requirements(RangeBounds(0.8, 1.2), 1.0)
    # 100 - 100*sqrt(0.8) ~ 10.56 per 100 virtual, about 9x leverage
    assert 100 * profile.numeraire_collateral == pytest.approx(10.557, abs=1e-3)
    assert round(profile.down_leverage) == 9
    # 1 - 1/sqrt(1.2) ~ 0.087 risk units, yielding 11x leverage
    assert profile.risk_collateral == pytest.approx(0.0871, abs=1e-4)
    assert round(profile.up_leverage) == 11


def test_leverage_asymmetric_ranges():
    wide = leverage_requirements(RangeBounds(0.8, 1.4), 1.0)
    assert round(wide.upper_boundary_risk, 2) == 0.85
    # ~15 numeraire units of risk asset required at the outset
    assert 100 * wide.risk_collateral == pytest.approx(15.5, abs=0.1)
    narrow = leverage_requirements(RangeBounds(0.8, 1.1), 1.0)
    assert round(narrow.upper_boundary_risk, 2) == 0.95


def test_leverage_entry_outside_range_rejected():
    with pytest.raises(ValueError):
        leverage_requirements(RangeBounds(0.8, 1.2), 1.3)


def test_leverage_boundary_entry_is_infinite():
    profile = leverage_requirements(RangeBounds(0.8, 1.2), 0.8)
    assert math.isinf(profile.down_leverage)
