"""Recover position balances, internal price and tick from an observed
liquidity adjustment.

When a position is adjusted, the token ratio of the transfer equals the
token ratio inside the position, so the balances can be solved from the
liquidity constant L, the range boundary prices (P_a lower, P_b upper)
and the observed ratio r. The token0 balance is the nonnegative root of

    r*sqrt(P_b) * x^2 + L*(r + (1-r)*sqrt(P_a*P_b)) * x
        - (1-r)*L^2*(sqrt(P_b) - sqrt(P_a)) = 0

with r measured as the token1 share y/(x+y) (the convention under which
the solution round-trips against the forward amount formulas; the
token0-share reading r = x/(x+y) is supported behind a flag and simply
maps to 1-r). token1 then follows from the swap relation, and the
internal price from a rational expression in x that algebraically
simplifies to the true price.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InconsistentObservationError
from .tickmath import price_to_tick

R_TOKEN1_SHARE = "token1-share"  # r = y / (x + y)
R_TOKEN0_SHARE = "token0-share"  # r = x / (x + y)
_CONVENTIONS = (R_TOKEN1_SHARE, R_TOKEN0_SHARE)

_BOUNDARY_EPS = 0.0  # r exactly 0 or 1 classifies as a boundary state


@dataclass(frozen=True)
class ObservedAdjustment:
    """One observed position change: liquidity constant, boundary prices
    and adjustment token ratio."""

    liquidity: float
    price_lower: float  # P_a
    price_upper: float  # P_b
    ratio: float  # r, token1 share by default

    def __post_init__(self):
        if not self.liquidity > 0:
            raise ValueError(f"liquidity must be positive, got {self.liquidity!r}")
        if not 0 < self.price_lower:
            raise ValueError(f"lower price must be positive, got {self.price_lower!r}")
        if not self.price_lower < self.price_upper:
            raise ValueError(
                f"boundary prices must satisfy lower < upper, got "
                f"{self.price_lower!r} >= {self.price_upper!r}"
            )
        if not 0 <= self.ratio <= 1:
            raise ValueError(f"ratio must lie in [0, 1], got {self.ratio!r}")


@dataclass(frozen=True)
class ReconstructedState:
    """Solved position state. ``boundary`` marks degenerate observations
    (ratio exactly 0 or 1: price pinned at a range end)."""

    token0: float
    token1: float
    price: float
    tick: int
    boundary: str | None = None


def _token1_share(obs: ObservedAdjustment, convention: str) -> float:
    if convention not in _CONVENTIONS:
        raise ValueError(f"unknown ratio convention {convention!r}; expected one of {_CONVENTIONS}")
    return obs.ratio if convention == R_TOKEN1_SHARE else 1.0 - obs.ratio


def solve_token0(obs: ObservedAdjustment, convention: str = R_TOKEN1_SHARE) -> float:
    """token0 balance consistent with the observation."""
    r = _token1_share(obs, convention)
    sa = math.sqrt(obs.price_lower)
    sb = math.sqrt(obs.price_upper)
    L = obs.liquidity
    if r >= 1.0:
        return 0.0  # all token1: price at the upper bound
    if r <= 0.0:
        return L * (sb - sa) / (sa * sb)  # all token0: price at the lower bound
    a = r * sb
    b = L * (r + (1.0 - r) * sa * sb)
    c = -(1.0 - r) * L * L * (sb - sa)
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise InconsistentObservationError(
            f"negative discriminant for observation {obs!r}"
        )
    # c <= 0 gives exactly one nonnegative root; this form avoids the
    # cancellation in (-b + sqrt(disc)) / (2a) when 4ac << b^2.
    x = 2.0 * c / (-b - math.sqrt(disc))
    if x < 0:
        raise InconsistentObservationError(
            f"no nonnegative token0 balance for observation {obs!r}"
        )
    return x


def solve_token1(x: float, obs: ObservedAdjustment) -> float:
    """token1 balance from token0 via the in-range swap relation."""
    if x < 0:
        raise ValueError(f"token0 balance must be nonnegative, got {x!r}")
    sa = math.sqrt(obs.price_lower)
    sb = math.sqrt(obs.price_upper)
    L = obs.liquidity
    return L * (-L * sa + L * sb - sa * sb * x) / (L + sb * x)


def internal_price(x: float, obs: ObservedAdjustment) -> float:
    """Pool-internal price implied by the token0 balance."""
    if x < 0:
        raise ValueError(f"token0 balance must be nonnegative, got {x!r}")
    sa = math.sqrt(obs.price_lower)
    sb = math.sqrt(obs.price_upper)
    L = obs.liquidity
    denom = L + sb * x
    return L * sa * sb / denom + L * sb * (-L * sa + L * sb - sa * sb * x) / (denom * denom)


def reconstruct(
    obs: ObservedAdjustment,
    convention: str = R_TOKEN1_SHARE,
    tolerance: float = 1e-9,
) -> ReconstructedState:
    """Full solve: balances, internal price and tick.

    Validates that the solved state is consistent with an in-range
    position (price inside the boundary prices, balances nonnegative)
    within ``tolerance``; degenerate ratios classify as boundary states
    instead of failing.
    """
    r = _token1_share(obs, convention)
    boundary = None
    if r <= _BOUNDARY_EPS:
        boundary = "lower"
    elif r >= 1.0 - _BOUNDARY_EPS:
        boundary = "upper"
    x = solve_token0(obs, convention)
    y = solve_token1(x, obs)
    price = internal_price(x, obs)
    if y < -tolerance * obs.liquidity:
        raise InconsistentObservationError(
            f"negative token1 balance {y!r} for observation {obs!r}"
        )
    y = max(y, 0.0)
    lo = obs.price_lower * (1.0 - tolerance)
    hi = obs.price_upper * (1.0 + tolerance)
    if not lo <= price <= hi:
        raise InconsistentObservationError(
            f"implied price {price!r} outside boundaries "
            f"[{obs.price_lower!r}, {obs.price_upper!r}]"
        )
    return ReconstructedState(
        token0=x,
        token1=y,
        price=price,
        tick=price_to_tick(price),
        boundary=boundary,
    )
