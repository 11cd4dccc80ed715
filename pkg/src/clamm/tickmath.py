"""Tick/price conversions and per-tick fee-growth accounting.

Ticks are plain ints on the geometric grid price = 1.0001**tick, bounded
at +/-887272 so prices stay comfortably inside double range. Conversion
from price uses floor rounding (grid convention), with a snap tolerance
so exact powers of 1.0001 land on their own tick despite float noise.

Fee growth is tracked per unit of liquidity, per token, in a global
accumulator plus per-tick "outside" snapshots that flip whenever the
current tick crosses an initialized tick. ``fee_growth_inside`` combines
them into the growth attributable to a tick range. Accumulators are
float by default; an integer X128 mode (values mod 2**256, differences
in two's complement) is available for bit-style fidelity checks.
"""

from __future__ import annotations

import math

MIN_TICK = -887272
MAX_TICK = 887272
TICK_BASE = 1.0001
_LOG_BASE = math.log(TICK_BASE)
_SNAP = 1e-6  # absolute snap on the fractional tick index

X128 = 1 << 128
_MOD = 1 << 256

# fee code -> (fee fraction, default tick spacing)
FEE_TIERS = {
    500: (0.0005, 10),
    3000: (0.003, 60),
    10000: (0.01, 200),
}


def check_tick(tick: int) -> int:
    if not isinstance(tick, (int,)) or isinstance(tick, bool):
        raise ValueError(f"tick must be an int, got {tick!r}")
    if tick < MIN_TICK or tick > MAX_TICK:
        raise ValueError(f"tick {tick} outside [{MIN_TICK}, {MAX_TICK}]")
    return tick


def price_to_tick(price: float) -> int:
    """floor(log(price) / log(1.0001)), snapped onto exact grid points."""
    if not price > 0 or math.isinf(price) or math.isnan(price):
        raise ValueError(f"price must be positive and finite, got {price!r}")
    raw = math.log(price) / _LOG_BASE
    nearest = round(raw)
    tick = nearest if abs(raw - nearest) < _SNAP else math.floor(raw)
    return check_tick(tick)


def tick_to_price(tick: int) -> float:
    check_tick(tick)
    return TICK_BASE ** tick


def sqrt_price_at_tick(tick: int) -> float:
    check_tick(tick)
    return TICK_BASE ** (tick / 2.0)


def align_down(tick: int, spacing: int) -> int:
    """Largest spacing-aligned tick <= tick."""
    return (tick // spacing) * spacing


def align_up(tick: int, spacing: int) -> int:
    """Smallest spacing-aligned tick >= tick."""
    return -((-tick) // spacing) * spacing


class FeeTier:
    """One of the three deployed fee tiers, with overridable spacing."""

    __slots__ = ("code", "rate", "spacing")

    def __init__(self, code: int, spacing: int | None = None):
        if code not in FEE_TIERS:
            raise ValueError(f"unknown fee tier code {code!r}; expected one of {sorted(FEE_TIERS)}")
        rate, default_spacing = FEE_TIERS[code]
        spacing = default_spacing if spacing is None else spacing
        if not isinstance(spacing, int) or spacing <= 0:
            raise ValueError(f"tick spacing must be a positive int, got {spacing!r}")
        self.code = code
        self.rate = rate
        self.spacing = spacing

    def __repr__(self):
        return f"FeeTier(code={self.code}, rate={self.rate}, spacing={self.spacing})"

    def __eq__(self, other):
        return (
            isinstance(other, FeeTier)
            and (self.code, self.rate, self.spacing) == (other.code, other.rate, other.spacing)
        )


class FeeGrowthAccumulator:
    """Global + per-tick-outside fee growth, per unit liquidity, per token.

    The owning pool is the single writer: it calls ``accrue`` while
    trading and ``cross`` whenever the current tick crosses an
    initialized tick. ``ensure_tick`` applies the usual initialization
    convention (outside = global for ticks at or below the current one).
    """

    def __init__(self, fixed_point: bool = False):
        self.fixed_point = fixed_point
        zero = 0 if fixed_point else 0.0
        self.global0 = zero
        self.global1 = zero
        self.outside: dict[int, list] = {}

    def _encode(self, amount_per_liquidity: float):
        if self.fixed_point:
            return int(round(amount_per_liquidity * X128)) % _MOD
        return amount_per_liquidity

    def _decode(self, raw) -> float:
        if self.fixed_point:
            return raw / X128
        return raw

    def _sub(self, a, b):
        if self.fixed_point:
            return (a - b) % _MOD
        return a - b

    def accrue(self, token: int, amount_per_liquidity: float) -> None:
        if amount_per_liquidity < 0:
            raise ValueError("fee growth can only increase")
        delta = self._encode(amount_per_liquidity)
        if token == 0:
            self.global0 = (self.global0 + delta) % _MOD if self.fixed_point else self.global0 + delta
        elif token == 1:
            self.global1 = (self.global1 + delta) % _MOD if self.fixed_point else self.global1 + delta
        else:
            raise ValueError(f"token index must be 0 or 1, got {token!r}")

    def ensure_tick(self, tick: int, current_tick: int) -> None:
        check_tick(tick)
        if tick not in self.outside:
            if tick <= current_tick:
                self.outside[tick] = [self.global0, self.global1]
            else:
                zero = 0 if self.fixed_point else 0.0
                self.outside[tick] = [zero, zero]

    def drop_tick(self, tick: int) -> None:
        self.outside.pop(tick, None)

    def cross(self, tick: int) -> None:
        snap = self.outside.get(tick)
        if snap is None:
            return
        snap[0] = self._sub(self.global0, snap[0])
        snap[1] = self._sub(self.global1, snap[1])

    def growth_inside(
        self, lower: int, upper: int, current: int, spacing: int = 1
    ) -> tuple[float, float]:
        return fee_growth_inside(lower, upper, current, self, spacing)


def fee_growth_inside(
    lower: int,
    upper: int,
    current: int,
    acc: FeeGrowthAccumulator,
    spacing: int = 1,
) -> tuple[float, float]:
    """Fee growth per unit liquidity accrued inside [lower, upper).

    Global growth minus the portions attributable below the lower tick
    and above the upper tick, each selected by where the current tick
    sits relative to the range. Ticks must be spacing-aligned and
    ordered; uninitialized ticks count as zero-outside snapshots.
    """
    check_tick(lower)
    check_tick(upper)
    if lower >= upper:
        raise ValueError(f"inverted range: lower {lower} must be < upper {upper}")
    if lower % spacing != 0 or upper % spacing != 0:
        raise ValueError(
            f"range [{lower}, {upper}] not aligned to tick spacing {spacing}"
        )
    zero = 0 if acc.fixed_point else 0.0
    lower_out = acc.outside.get(lower, [zero, zero])
    upper_out = acc.outside.get(upper, [zero, zero])
    result = []
    for token, global_growth in ((0, acc.global0), (1, acc.global1)):
        if current >= lower:
            below = lower_out[token]
        else:
            below = acc._sub(global_growth, lower_out[token])
        if current < upper:
            above = upper_out[token]
        else:
            above = acc._sub(global_growth, upper_out[token])
        inside = acc._sub(acc._sub(global_growth, below), above)
        result.append(acc._decode(inside))
    return result[0], result[1]
