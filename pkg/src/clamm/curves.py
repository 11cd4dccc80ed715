"""Closed-form mathematics of constant-product and range-bounded AMMs.

Conventions used throughout:

  * ``x`` is the exchange ratio of the risk asset measured in the
    numeraire, normalised so that x = 1 at position entry.
  * The canonical constant-product portfolio holds one unit of each asset
    at entry, so HODL(x) = 1 + x and AMM(x) = 2*sqrt(x), both worth 2 at
    entry.
  * A range-bounded portfolio is parameterised by its bounds [x0, x1] and
    an overall notional factor n0; below the range it is fully vested in
    the risk asset (n0 units), above it fully in the numeraire
    (n0 * sqrt(x0 * x1) units), and in between it interpolates such that
    the value and holdings curves are continuous at both bounds.

All functions are pure and operate on plain floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def _require_positive(value: float, name: str) -> None:
    if not (value > 0) or math.isinf(value) or math.isnan(value):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class RangeBounds:
    """A liquidity range 0 < lower < upper in exchange-ratio terms."""

    lower: float
    upper: float

    def __post_init__(self):
        _require_positive(self.lower, "lower bound")
        _require_positive(self.upper, "upper bound")
        if not self.lower < self.upper:
            raise ValueError(
                f"invalid range: lower {self.lower!r} must be < upper {self.upper!r}"
            )

    @property
    def conversion_ratio(self) -> float:
        """Geometric midpoint sqrt(x0*x1): the rate at which a full
        range traversal converts the risk asset into the numeraire."""
        return math.sqrt(self.lower * self.upper)

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def scaled(self, factor: float) -> "RangeBounds":
        """Bounds re-expressed after dividing ratios by ``factor``."""
        return RangeBounds(self.lower / factor, self.upper / factor)


@dataclass(frozen=True)
class Holdings:
    """Asset quantities of a portfolio: ``risk`` units of the risk asset
    plus ``numeraire`` units of the numeraire."""

    risk: float
    numeraire: float

    def __post_init__(self):
        if self.risk < 0 or self.numeraire < 0:
            raise ValueError(f"holdings must be nonnegative, got {self}")

    def value_at(self, x: float) -> float:
        _require_positive(x, "exchange ratio")
        return self.numeraire + self.risk * x


def hodl_value(x: float, holdings: Holdings) -> float:
    """Value of holding ``holdings`` unchanged at exchange ratio ``x``.

    For the canonical one-and-one portfolio this is 1 + x.
    """
    return holdings.value_at(x)


def cpamm_value(x: float) -> float:
    """Value of the canonical constant-product portfolio: 2*sqrt(x)."""
    _require_positive(x, "exchange ratio")
    return 2.0 * math.sqrt(x)


def cpamm_il(x: float) -> float:
    """Impermanent loss fraction of the canonical constant-product pool.

        (AMM(x) - HODL(x)) / HODL(1)  =  (2*sqrt(x) - x - 1) / 2

    Nonpositive for every x > 0 and zero only at x = 1, because the HODL
    line 1 + x is the tangent of the concave value curve 2*sqrt(x) at
    the entry ratio.
    """
    _require_positive(x, "exchange ratio")
    return 0.5 * (2.0 * math.sqrt(x) - x - 1.0)


def geometric_mean_price(p_before: float, p_after: float) -> float:
    """Average execution price sqrt(p_before * p_after) of a fee-free
    constant-product trade between two pool-implied prices."""
    _require_positive(p_before, "price")
    _require_positive(p_after, "price")
    return math.sqrt(p_before * p_after)


def clamm_value(x: float, bounds: RangeBounds, n0: float = 1.0) -> float:
    """Value of a range-bounded AMM portfolio at exchange ratio ``x``.

    Piecewise: linear (n0*x) below the range, constant
    (n0*sqrt(x0*x1)) above it, and in between

        n0 * ( sqrt(x0*x1) * (sqrt(x) - sqrt(x0)) / (sqrt(x1) - sqrt(x0))
             + sqrt(x0*x)  * (sqrt(x1) - sqrt(x)) / (sqrt(x1) - sqrt(x0)) )

    which is continuous at both bounds. Evaluation exactly at a bound
    uses the in-range branch.
    """
    _require_positive(x, "exchange ratio")
    _require_positive(n0, "notional factor")
    if x < bounds.lower:
        return n0 * x
    if x > bounds.upper:
        return n0 * bounds.conversion_ratio
    sx = math.sqrt(x)
    s0 = math.sqrt(bounds.lower)
    s1 = math.sqrt(bounds.upper)
    span = s1 - s0
    return n0 * (bounds.conversion_ratio * (sx - s0) / span + s0 * sx * (s1 - sx) / span)


def clamm_holdings(x: float, bounds: RangeBounds, n0: float = 1.0) -> Holdings:
    """Asset composition of a range-bounded portfolio at ratio ``x``.

    The risk holding runs from n0 (below the range) to 0 (above it); the
    numeraire holding from 0 to n0*sqrt(x0*x1). Satisfies the value
    identity  numeraire + x*risk == clamm_value(x)  for every x.
    """
    _require_positive(x, "exchange ratio")
    _require_positive(n0, "notional factor")
    if x < bounds.lower:
        return Holdings(risk=n0, numeraire=0.0)
    if x > bounds.upper:
        return Holdings(risk=0.0, numeraire=n0 * bounds.conversion_ratio)
    sx = math.sqrt(x)
    s0 = math.sqrt(bounds.lower)
    s1 = math.sqrt(bounds.upper)
    span = s1 - s0
    risk = n0 * (s0 / sx) * (s1 - sx) / span
    numeraire = n0 * bounds.conversion_ratio * (sx - s0) / span
    return Holdings(risk=risk, numeraire=numeraire)


def liquidity_notional(liquidity: float, bounds: RangeBounds) -> float:
    """Notional factor n0 equivalent to a position with the given
    liquidity constant over ``bounds``.

    With n0 = L * (1/sqrt(x0) - 1/sqrt(x1)) the holdings curves coincide
    with the usual liquidity-constant amount formulas
    L*(1/sqrt(x) - 1/sqrt(x1)) and L*(sqrt(x) - sqrt(x0)).
    """
    _require_positive(liquidity, "liquidity")
    return liquidity * (1.0 / math.sqrt(bounds.lower) - 1.0 / math.sqrt(bounds.upper))


@dataclass(frozen=True)
class LeverageProfile:
    """Collateral requirements of a range position per unit of virtual
    full-range notional.

    ``numeraire_collateral`` is the fraction of the virtual numeraire leg
    that must actually be contributed (1 - sqrt(x0/entry)); the remainder
    is guaranteed to survive at the lower bound. ``risk_collateral`` is
    the fraction of the virtual risk leg to contribute
    (1 - sqrt(entry/x1)*entry/x1 ... i.e. 1 - 1/sqrt(x1/entry)).
    Leverage figures are the reciprocals; entry exactly on a bound gives
    infinite leverage on that side.
    """

    numeraire_collateral: float
    risk_collateral: float
    down_leverage: float
    up_leverage: float
    lower_boundary_numeraire: float
    upper_boundary_risk: float


def leverage_requirements(bounds: RangeBounds, entry: float) -> LeverageProfile:
    """Collateral and leverage of a range position entered at ``entry``.

    The virtual portfolio is the full-range pool holding one risk unit
    and ``entry`` numeraire units. At the lower bound the pool still
    holds sqrt(x0/entry) of its numeraire leg, so only the difference
    needs to be posted; symmetrically at the upper bound 1/sqrt(x1/entry)
    risk units survive.
    """
    _require_positive(entry, "entry ratio")
    if not bounds.contains(entry):
        raise ValueError(
            f"entry ratio {entry!r} outside range [{bounds.lower!r}, {bounds.upper!r}]"
        )
    lo = bounds.lower / entry
    hi = bounds.upper / entry
    lower_boundary_numeraire = math.sqrt(lo)
    upper_boundary_risk = 1.0 / math.sqrt(hi)
    numeraire_collateral = 1.0 - lower_boundary_numeraire
    risk_collateral = 1.0 - upper_boundary_risk
    down_leverage = 1.0 / numeraire_collateral if numeraire_collateral > 0 else math.inf
    up_leverage = 1.0 / risk_collateral if risk_collateral > 0 else math.inf
    return LeverageProfile(
        numeraire_collateral=numeraire_collateral,
        risk_collateral=risk_collateral,
        down_leverage=down_leverage,
        up_leverage=up_leverage,
        lower_boundary_numeraire=lower_boundary_numeraire,
        upper_boundary_risk=upper_boundary_risk,
    )
