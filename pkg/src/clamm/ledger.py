"""Position lifecycle accounting: novation into imputed positions,
impermanent-loss decomposition and USD conversion.

Every liquidity change closes the entire position and reopens it at the
post-change holdings, producing one imputed position per inter-event
interval with positive liquidity; whatever is still open at the end of
the price series is closed out at its last point. Collect events do not
novate (they withdraw fees, not liquidity).

Per imputed position, with P1 the close-time exchange ratio and
(x0,y0)/(x1,y1) the opening/closing compositions,

    actual IL = (P1*x1 + y1) / (P1*x0 + y0) - 1

which is invariant across the two pool tokens as numeraire. The minimal
component re-runs the same formula over the maximal runs of price
samples that lie inside the position's range (a virtual sub-position per
run); the out-of-range component is the residual, so the decomposition
is additive by construction. USD figures convert at the close of each
imputed position: percentage IL times the opening holdings' value at
close times the numeraire's USD spot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .curves import RangeBounds, clamm_holdings, liquidity_notional
from .errors import MissingPriceError
from .paths import PricePath
from .tickmath import tick_to_price

EVENT_KINDS = ("mint", "increase", "decrease", "collect", "burn")
_KIND_ORDER = {k: i for i, k in enumerate(EVENT_KINDS)}
_NUMERAIRES = ("token1", "token0")
_LIQ_EPS = 1e-12


@dataclass(frozen=True)
class LiquidityEvent:
    kind: str
    block: int
    timestamp: float
    amount0: float = 0.0
    amount1: float = 0.0
    liquidity_delta: float = 0.0

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.kind == "collect" and (self.amount0 < 0 or self.amount1 < 0):
            raise ValueError("collect amounts must be nonnegative")
        if self.kind == "collect" and self.liquidity_delta != 0:
            raise ValueError("collect events cannot change liquidity")

    @property
    def changes_liquidity(self) -> bool:
        return self.kind != "collect"

    def sort_key(self):
        return (self.timestamp, self.block, _KIND_ORDER[self.kind])


@dataclass
class RangePosition:
    position_id: str
    wallet_id: str
    pool_id: str
    tick_lower: int
    tick_upper: int
    events: list[LiquidityEvent] = field(default_factory=list)

    def __post_init__(self):
        if self.tick_lower >= self.tick_upper:
            raise ValueError(
                f"position {self.position_id}: inverted tick range "
                f"[{self.tick_lower}, {self.tick_upper}]"
            )

    @property
    def bounds(self) -> RangeBounds:
        return RangeBounds(tick_to_price(self.tick_lower), tick_to_price(self.tick_upper))

    def sorted_events(self) -> list[LiquidityEvent]:
        return sorted(self.events, key=LiquidityEvent.sort_key)


@dataclass
class ImputedPosition:
    """One novation segment of a position."""

    open_time: float
    close_time: float
    open_block: int | None
    close_block: int | None
    bounds: RangeBounds
    liquidity: float
    open_ratio: float
    close_ratio: float
    open_token0: float
    open_token1: float
    close_token0: float
    close_token1: float
    close_spot_usd: float | None = None
    flash: bool = False

    def __post_init__(self):
        if self.close_time < self.open_time:
            raise ValueError("imputed position closes before it opens")
        for qty in (self.open_token0, self.open_token1, self.close_token0, self.close_token1):
            if qty < 0:
                raise ValueError("composition quantities must be nonnegative")


@dataclass
class ILBreakdown:
    """Position-level decomposition; USD additivity holds exactly by
    construction (out-of-range is the residual)."""

    minimal_pct: float
    out_of_range_pct: float
    actual_pct: float
    minimal_usd: float
    out_of_range_usd: float
    actual_usd: float
    fees_usd: float = 0.0


def composition(bounds: RangeBounds, liquidity: float, ratio: float) -> tuple[float, float]:
    """(token0, token1) composition of a range position at ``ratio``."""
    h = clamm_holdings(ratio, bounds, liquidity_notional(liquidity, bounds))
    return h.risk, h.numeraire


def _value(token0: float, token1: float, ratio: float, numeraire: str) -> float:
    if numeraire == "token1":
        return token0 * ratio + token1
    if numeraire == "token0":
        return token0 + token1 / ratio
    raise ValueError(f"numeraire must be one of {_NUMERAIRES}, got {numeraire!r}")


def novate(
    position: RangePosition,
    ratios: PricePath,
    numeraire_spot_usd=None,
) -> list[ImputedPosition]:
    """Split a position's life into imputed positions.

    ``ratios`` is the pool exchange-ratio series (token1 per token0);
    event times match to their nearest sample. ``numeraire_spot_usd`` is
    an optional callable t -> USD per numeraire unit used to stamp each
    segment's close.
    """
    events = position.sorted_events()
    changes = [e for e in events if e.changes_liquidity]
    if not changes:
        return []
    for earlier, later in zip(changes, changes[1:]):
        if later.timestamp < earlier.timestamp:
            raise ValueError("events must be chronological")
    ratios.require_coverage(changes[0].timestamp, changes[-1].timestamp)

    bounds = position.bounds
    segments: list[ImputedPosition] = []
    liquidity = 0.0
    open_at: tuple[float, int, float] | None = None  # (time, block, ratio)

    def close_segment(time: float, block: int | None, ratio: float) -> None:
        open_time, open_block, open_ratio = open_at
        open0, open1 = composition(bounds, liquidity, open_ratio)
        close0, close1 = composition(bounds, liquidity, ratio)
        segments.append(
            ImputedPosition(
                open_time=open_time,
                close_time=time,
                open_block=open_block,
                close_block=block,
                bounds=bounds,
                liquidity=liquidity,
                open_ratio=open_ratio,
                close_ratio=ratio,
                open_token0=open0,
                open_token1=open1,
                close_token0=close0,
                close_token1=close1,
                close_spot_usd=(
                    numeraire_spot_usd(time) if numeraire_spot_usd is not None else None
                ),
                flash=(
                    open_block is not None
                    and block is not None
                    and open_block == block
                ),
            )
        )

    for event in changes:
        ratio = ratios.at(event.timestamp)
        if liquidity > _LIQ_EPS and open_at is not None:
            close_segment(event.timestamp, event.block, ratio)
        liquidity += event.liquidity_delta
        if liquidity < -_LIQ_EPS:
            raise ValueError(
                f"position {position.position_id}: liquidity would go negative "
                f"at t={event.timestamp}"
            )
        liquidity = max(liquidity, 0.0)
        open_at = (event.timestamp, event.block, ratio) if liquidity > _LIQ_EPS else None

    if open_at is not None:
        # Still open: close out at the point of calculation.
        close_segment(ratios.end_time, None, float(ratios.prices[-1]))
    return segments


def actual_il(seg: ImputedPosition, numeraire: str = "token1") -> float:
    """IL fraction of one imputed position over its whole life."""
    value_close = _value(seg.close_token0, seg.close_token1, seg.close_ratio, numeraire)
    value_hodl = _value(seg.open_token0, seg.open_token1, seg.close_ratio, numeraire)
    if value_hodl == 0:
        raise ValueError("empty opening portfolio")
    return value_close / value_hodl - 1.0


def in_range_runs(
    seg: ImputedPosition, ratios: PricePath
) -> list[list[tuple[float, float]]]:
    """Maximal runs of consecutive in-range (time, ratio) samples over
    the segment. Crossings between samples are recognized at the first
    sample beyond the boundary, so the legs that straddle a boundary
    fall outside every run."""
    samples = [(seg.open_time, seg.open_ratio)]
    samples += ratios.between(seg.open_time, seg.close_time)
    samples.append((seg.close_time, seg.close_ratio))
    runs: list[list[tuple[float, float]]] = []
    current: list[tuple[float, float]] = []
    for t, ratio in samples:
        if seg.bounds.contains(ratio):
            current.append((t, ratio))
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def minimal_il(seg: ImputedPosition, ratios: PricePath, numeraire: str = "token1") -> float:
    """IL incurred while the price was inside the range.

    Each maximal in-range run becomes a virtual sub-position opened at
    the run's first sample and closed at its last; out-of-range stretches
    contribute nothing here.
    """
    ratios.require_coverage(seg.open_time, seg.close_time)
    total = 0.0
    for run in in_range_runs(seg, ratios):
        first, last = run[0][1], run[-1][1]
        if len(run) < 2 or first == last:
            continue
        start0, start1 = composition(seg.bounds, seg.liquidity, first)
        end0, end1 = composition(seg.bounds, seg.liquidity, last)
        hodl = _value(start0, start1, last, numeraire)
        total += _value(end0, end1, last, numeraire) / hodl - 1.0
    return total


def out_of_range_il(seg: ImputedPosition, ratios: PricePath, numeraire: str = "token1") -> float:
    """Residual IL from holding the frozen boundary composition while
    out of range: actual minus minimal, enforcing additivity."""
    return actual_il(seg, numeraire) - minimal_il(seg, ratios, numeraire)


def hodl_base(seg: ImputedPosition, numeraire: str = "token1") -> float:
    """Value of the opening composition at the close ratio; the base the
    percentage IL applies to."""
    return _value(seg.open_token0, seg.open_token1, seg.close_ratio, numeraire)


def il_usd(seg: ImputedPosition, numeraire: str = "token1") -> float:
    """USD impermanent loss of one segment, converted at its close."""
    if seg.close_spot_usd is None:
        raise MissingPriceError("numeraire", seg.close_time)
    return actual_il(seg, numeraire) * hodl_base(seg, numeraire) * seg.close_spot_usd


def position_breakdown(
    segments: list[ImputedPosition],
    ratios: PricePath,
    numeraire: str = "token1",
) -> ILBreakdown:
    """Aggregate a position's segments into one ILBreakdown.

    USD figures sum segment-by-segment (converted at each segment's
    close); percentage figures divide those totals by the total USD HODL
    base, so minimal + out-of-range equals actual exactly in both units.
    """
    minimal_usd = 0.0
    actual_raw = 0.0
    base_usd = 0.0
    for seg in segments:
        spot = 1.0 if seg.close_spot_usd is None else seg.close_spot_usd
        base = hodl_base(seg, numeraire) * spot
        actual_raw += actual_il(seg, numeraire) * base
        minimal_usd += minimal_il(seg, ratios, numeraire) * base
        base_usd += base
    # out-of-range is the residual; re-summing keeps the additivity
    # identity exact in floating point
    out_usd = actual_raw - minimal_usd
    actual_usd = minimal_usd + out_usd
    if base_usd > 0:
        minimal_pct = minimal_usd / base_usd
        out_pct = out_usd / base_usd
    else:
        minimal_pct = 0.0
        out_pct = 0.0
    return ILBreakdown(
        minimal_pct=minimal_pct,
        out_of_range_pct=out_pct,
        actual_pct=minimal_pct + out_pct,
        minimal_usd=minimal_usd,
        out_of_range_usd=out_usd,
        actual_usd=actual_usd,
    )


def fees_usd(
    position: RangePosition,
    usd0,
    usd1,
    uncollected: tuple[float, float] | None = None,
    asof: float | None = None,
) -> float:
    """USD fee income of a position.

    Collect events convert at their own (nearest-hour) withdrawal time;
    an optional uncollected entitlement (token0, token1) converts at
    ``asof`` -- the latest available rate for positions still open.
    """
    total = 0.0
    for event in position.sorted_events():
        if event.kind != "collect":
            continue
        total += event.amount0 * usd0(event.timestamp) + event.amount1 * usd1(event.timestamp)
    if uncollected is not None:
        a0, a1 = uncollected
        if a0 < 0 or a1 < 0:
            raise ValueError("uncollected fee amounts must be nonnegative")
        if asof is None:
            raise ValueError("asof time required to price uncollected fees")
        total += a0 * usd0(asof) + a1 * usd1(asof)
    return total
