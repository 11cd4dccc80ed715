"""Tick-level pool simulator.

Within a tick bracket the pool trades like a constant-product AMM on
virtual reserves (L/S, L*S) where S is the square-root price; crossing
an initialized tick adds or removes that tick's net liquidity and flips
its fee-growth-outside snapshots. Fees are charged on the input token,
never join the reserves, and accrue per unit of active liquidity.

Two entry points share one segment walker: ``swap`` consumes an exact
input amount (raising PartialFillError when initialized liquidity runs
out) and ``arbitrage_to`` moves the pool price to an external target
(clamping at liquidity exhaustion). Price regions with no liquidity are
traversed freely: nothing trades there, so the price jumps across.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass, field

from .errors import PartialFillError
from .tickmath import (
    MAX_TICK,
    MIN_TICK,
    FeeGrowthAccumulator,
    FeeTier,
    align_down,
    align_up,
    check_tick,
    price_to_tick,
    sqrt_price_at_tick,
)

TOKEN0_IN = "0to1"  # sell token0, price moves down
TOKEN1_IN = "1to0"  # sell token1, price moves up
_DIRECTIONS = (TOKEN0_IN, TOKEN1_IN)


@dataclass
class SwapResult:
    direction: str
    amount_in: float = 0.0  # gross input, fee included
    amount_out: float = 0.0
    fee_paid: float = 0.0
    ticks_crossed: list[int] = field(default_factory=list)
    end_price: float = 0.0

    @property
    def net_in(self) -> float:
        return self.amount_in - self.fee_paid

    @property
    def is_empty(self) -> bool:
        return self.amount_in == 0.0 and self.amount_out == 0.0

    @property
    def average_price(self) -> float:
        """Fee-exclusive execution price, token1 per token0."""
        if self.is_empty:
            return math.nan
        if self.direction == TOKEN1_IN:
            return self.net_in / self.amount_out
        return self.amount_out / self.net_in


def full_range_ticks(spacing: int) -> tuple[int, int]:
    """Widest spacing-aligned tick range."""
    return align_up(MIN_TICK, spacing), align_down(MAX_TICK, spacing)


class PoolState:
    """Mutable simulator state for one pool; single-writer."""

    def __init__(
        self,
        price: float,
        fee_tier: FeeTier,
        fee_rate: float | None = None,
        fixed_point: bool = False,
    ):
        if not price > 0:
            raise ValueError(f"initial price must be positive, got {price!r}")
        if fee_rate is not None and not 0 <= fee_rate < 1:
            raise ValueError(f"fee rate must lie in [0, 1), got {fee_rate!r}")
        self.fee_tier = fee_tier
        self.fee_rate = fee_tier.rate if fee_rate is None else fee_rate
        self.sqrt_price = math.sqrt(price)
        self.current_tick = price_to_tick(price)
        self.active_liquidity = 0.0
        self.ticks: dict[int, list] = {}  # tick -> [liquidity_net, liquidity_gross]
        self._tick_keys: list[int] = []
        self.acc = FeeGrowthAccumulator(fixed_point=fixed_point)

    # ----- properties ---------------------------------------------------

    @property
    def price(self) -> float:
        return self.sqrt_price * self.sqrt_price

    # ----- liquidity management ------------------------------------------

    def _touch_tick(self, tick: int) -> list:
        entry = self.ticks.get(tick)
        if entry is None:
            check_tick(tick)
            entry = [0.0, 0.0]
            self.ticks[tick] = entry
            insort(self._tick_keys, tick)
            self.acc.ensure_tick(tick, self.current_tick)
        return entry

    def _release_tick(self, tick: int) -> None:
        entry = self.ticks.get(tick)
        if entry is not None and entry[1] <= 0.0:
            del self.ticks[tick]
            self._tick_keys.remove(tick)
            self.acc.drop_tick(tick)

    def _check_range(self, tick_lower: int, tick_upper: int) -> None:
        check_tick(tick_lower)
        check_tick(tick_upper)
        if tick_lower >= tick_upper:
            raise ValueError(f"inverted tick range [{tick_lower}, {tick_upper}]")
        spacing = self.fee_tier.spacing
        if tick_lower % spacing or tick_upper % spacing:
            raise ValueError(
                f"range [{tick_lower}, {tick_upper}] not aligned to spacing {spacing}"
            )

    def add_liquidity(self, tick_lower: int, tick_upper: int, liquidity: float) -> tuple[float, float]:
        """Register liquidity over [tick_lower, tick_upper); returns the
        token amounts the position deposits at the current price."""
        self._check_range(tick_lower, tick_upper)
        if not liquidity > 0:
            raise ValueError(f"liquidity must be positive, got {liquidity!r}")
        lower = self._touch_tick(tick_lower)
        upper = self._touch_tick(tick_upper)
        lower[0] += liquidity
        lower[1] += liquidity
        upper[0] -= liquidity
        upper[1] += liquidity
        if tick_lower <= self.current_tick < tick_upper:
            self.active_liquidity += liquidity
        return self.position_amounts(tick_lower, tick_upper, liquidity)

    def remove_liquidity(self, tick_lower: int, tick_upper: int, liquidity: float) -> tuple[float, float]:
        """Withdraw liquidity; returns the token amounts released."""
        self._check_range(tick_lower, tick_upper)
        if not liquidity > 0:
            raise ValueError(f"liquidity must be positive, got {liquidity!r}")
        lower = self.ticks.get(tick_lower)
        upper = self.ticks.get(tick_upper)
        if lower is None or upper is None or lower[1] < liquidity or upper[1] < liquidity:
            raise ValueError(
                f"no {liquidity!r} liquidity registered over [{tick_lower}, {tick_upper}]"
            )
        amounts = self.position_amounts(tick_lower, tick_upper, liquidity)
        lower[0] -= liquidity
        lower[1] -= liquidity
        upper[0] += liquidity
        upper[1] -= liquidity
        if tick_lower <= self.current_tick < tick_upper:
            self.active_liquidity -= liquidity
        self._release_tick(tick_lower)
        self._release_tick(tick_upper)
        return amounts

    def position_amounts(self, tick_lower: int, tick_upper: int, liquidity: float) -> tuple[float, float]:
        """Token amounts a position holds at the current pool price."""
        s_lower = sqrt_price_at_tick(tick_lower)
        s_upper = sqrt_price_at_tick(tick_upper)
        s = self.sqrt_price
        if s <= s_lower:
            return liquidity * (1.0 / s_lower - 1.0 / s_upper), 0.0
        if s >= s_upper:
            return 0.0, liquidity * (s_upper - s_lower)
        return (
            liquidity * (1.0 / s - 1.0 / s_upper),
            liquidity * (s - s_lower),
        )

    def growth_inside(self, tick_lower: int, tick_upper: int) -> tuple[float, float]:
        return self.acc.growth_inside(
            tick_lower, tick_upper, self.current_tick, self.fee_tier.spacing
        )

    def check_invariants(self) -> None:
        """Assert the state invariants; used by tests."""
        prefix = math.fsum(
            entry[0] for tick, entry in self.ticks.items() if tick <= self.current_tick
        )
        if abs(prefix - self.active_liquidity) > 1e-6 * max(1.0, abs(prefix)):
            raise AssertionError(
                f"active liquidity {self.active_liquidity} != prefix sum {prefix}"
            )
        lo = sqrt_price_at_tick(self.current_tick)
        hi = sqrt_price_at_tick(min(self.current_tick + 1, MAX_TICK))
        if not (lo * (1 - 1e-12) <= self.sqrt_price <= hi * (1 + 1e-12)):
            raise AssertionError(
                f"sqrt price {self.sqrt_price} outside bracket of tick {self.current_tick}"
            )

    # ----- swapping -------------------------------------------------------

    def _next_boundary(self, up: bool) -> int | None:
        keys = self._tick_keys
        if up:
            i = bisect_right(keys, self.current_tick)
            return keys[i] if i < len(keys) else None
        i = bisect_left(keys, self.current_tick + 1)
        return keys[i - 1] if i > 0 else None

    def _cross_up(self, tick: int, crossed: list[int]) -> None:
        self.acc.cross(tick)
        self.active_liquidity += self.ticks[tick][0]
        self.current_tick = tick
        crossed.append(tick)

    def _cross_down(self, tick: int, crossed: list[int]) -> None:
        self.acc.cross(tick)
        self.active_liquidity -= self.ticks[tick][0]
        self.current_tick = tick - 1
        crossed.append(tick)

    def _walk(
        self,
        direction: str,
        amount_in: float | None,
        target_sqrt: float | None,
    ) -> SwapResult:
        up = direction == TOKEN1_IN
        rate = self.fee_rate
        remaining = amount_in
        result = SwapResult(direction=direction)

        while True:
            if target_sqrt is not None:
                if (up and self.sqrt_price >= target_sqrt) or (
                    not up and self.sqrt_price <= target_sqrt
                ):
                    break
            if remaining is not None and remaining <= 0:
                break

            boundary = self._next_boundary(up)
            liquidity = self.active_liquidity

            if liquidity <= 0:
                # No liquidity here: the price moves freely, nothing trades.
                if boundary is None:
                    if target_sqrt is not None:
                        break  # clamp at exhaustion
                    result.end_price = self.price
                    raise PartialFillError(result)
                boundary_sqrt = sqrt_price_at_tick(boundary)
                if target_sqrt is not None and (
                    (up and target_sqrt < boundary_sqrt)
                    or (not up and target_sqrt > boundary_sqrt)
                ):
                    self.sqrt_price = target_sqrt
                    self.current_tick = price_to_tick(target_sqrt * target_sqrt)
                    break
                self.sqrt_price = boundary_sqrt
                if up:
                    self._cross_up(boundary, result.ticks_crossed)
                else:
                    self._cross_down(boundary, result.ticks_crossed)
                continue

            if boundary is None:
                raise RuntimeError("active liquidity with no bounding tick")

            # Stop at whichever comes first: the tick boundary or the target.
            boundary_sqrt = sqrt_price_at_tick(boundary)
            stop_sqrt = boundary_sqrt
            at_boundary = True
            if target_sqrt is not None and (
                (up and target_sqrt <= boundary_sqrt)
                or (not up and target_sqrt >= boundary_sqrt)
            ):
                stop_sqrt = target_sqrt
                at_boundary = target_sqrt == boundary_sqrt

            s = self.sqrt_price
            if up:
                net_capacity = liquidity * (stop_sqrt - s)
            else:
                net_capacity = liquidity * (1.0 / stop_sqrt - 1.0 / s)
            gross_capacity = net_capacity / (1.0 - rate)

            if remaining is not None and remaining < gross_capacity:
                # Ends inside this segment.
                net_in = remaining * (1.0 - rate)
                fee = remaining - net_in
                if up:
                    s_new = s + net_in / liquidity
                    out = liquidity * (1.0 / s - 1.0 / s_new)
                else:
                    s_new = liquidity * s / (liquidity + net_in * s)
                    out = liquidity * (s - s_new)
                self.sqrt_price = s_new
                self.current_tick = price_to_tick(s_new * s_new)
                self.acc.accrue(1 if up else 0, fee / liquidity)
                result.amount_in += remaining
                result.amount_out += out
                result.fee_paid += fee
                remaining = 0.0
                break

            # Consume the whole segment up to the stop price.
            fee = gross_capacity - net_capacity
            if up:
                out = liquidity * (1.0 / s - 1.0 / stop_sqrt)
            else:
                out = liquidity * (s - stop_sqrt)
            if gross_capacity > 0:
                self.acc.accrue(1 if up else 0, fee / liquidity)
            result.amount_in += gross_capacity
            result.amount_out += out
            result.fee_paid += fee
            if remaining is not None:
                remaining = max(0.0, remaining - gross_capacity)
            self.sqrt_price = stop_sqrt
            if at_boundary:
                if up:
                    self._cross_up(boundary, result.ticks_crossed)
                else:
                    self._cross_down(boundary, result.ticks_crossed)
            else:
                self.current_tick = price_to_tick(stop_sqrt * stop_sqrt)

        result.end_price = self.price
        return result

    def swap(self, amount_in: float, direction: str) -> SwapResult:
        """Swap an exact gross input amount through the pool."""
        if direction not in _DIRECTIONS:
            raise ValueError(f"direction must be one of {_DIRECTIONS}, got {direction!r}")
        if amount_in < 0:
            raise ValueError(f"amount_in must be nonnegative, got {amount_in!r}")
        if amount_in == 0:
            return SwapResult(direction=direction, end_price=self.price)
        return self._walk(direction, amount_in, None)

    def arbitrage_to(self, external_price: float) -> SwapResult:
        """Trade until the pool price equals ``external_price`` (or
        liquidity runs out, whichever happens first)."""
        if not external_price > 0:
            raise ValueError(f"external price must be positive, got {external_price!r}")
        target_sqrt = math.sqrt(external_price)
        if target_sqrt == self.sqrt_price:
            return SwapResult(direction=TOKEN1_IN, end_price=self.price)
        direction = TOKEN1_IN if target_sqrt > self.sqrt_price else TOKEN0_IN
        return self._walk(direction, None, target_sqrt)


def replay(pool: PoolState, path, arbitrage: bool = True) -> list[tuple[float, SwapResult]]:
    """Drive ``pool`` along an external price path.

    At every path point the pool is arbitraged to the external price
    (when ``arbitrage`` is on). Returns the nonempty trades as
    (timestamp, SwapResult) pairs.
    """
    trades: list[tuple[float, SwapResult]] = []
    if not arbitrage:
        return trades
    for t, p in zip(path.times, path.prices):
        result = pool.arbitrage_to(float(p))
        if not result.is_empty:
            trades.append((float(t), result))
    return trades
