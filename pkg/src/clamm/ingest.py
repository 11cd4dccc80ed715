"""Event-log and price-feed ingestion.

File contracts (UTF-8, RFC-4180):

  events CSV header:
    pool_id,position_id,wallet_id,kind,block,timestamp,amount0,amount1,liquidity_delta,tick_lower,tick_upper
  prices CSV header:
    hour,token_id,usd_price          (hour = UNIX seconds, multiple of 3600)

Pool ids follow the convention TOKEN0-TOKEN1-FEECODE (e.g. USDC-WETH-500)
so analytics can join events to the per-token USD feed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, MissingPriceError
from .ledger import EVENT_KINDS, LiquidityEvent, RangePosition
from .paths import PricePath

EVENTS_HEADER = [
    "pool_id",
    "position_id",
    "wallet_id",
    "kind",
    "block",
    "timestamp",
    "amount0",
    "amount1",
    "liquidity_delta",
    "tick_lower",
    "tick_upper",
]
PRICES_HEADER = ["hour", "token_id", "usd_price"]

HOUR = 3600
DEFAULT_MAX_GAP = 2 * HOUR


@dataclass(frozen=True)
class EventRecord:
    pool_id: str
    position_id: str
    wallet_id: str
    kind: str
    block: int
    timestamp: float
    amount0: float
    amount1: float
    liquidity_delta: float
    tick_lower: int
    tick_upper: int

    def sort_key(self):
        return (self.pool_id, self.position_id, self.timestamp, self.block, self.kind)


@dataclass(frozen=True)
class PricePoint:
    hour: int
    token_id: str
    usd_price: float


def pool_tokens(pool_id: str) -> tuple[str, str, int]:
    """Split TOKEN0-TOKEN1-FEECODE into its parts."""
    parts = pool_id.rsplit("-", 2)
    if len(parts) != 3 or not parts[2].isdigit():
        raise DataFormatError(
            f"pool_id {pool_id!r} does not follow TOKEN0-TOKEN1-FEECODE"
        )
    return parts[0], parts[1], int(parts[2])


def load_events(path: str) -> list[EventRecord]:
    """Read, validate and sort an events CSV."""
    records: list[EventRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != EVENTS_HEADER:
            raise DataFormatError(
                f"expected events header {','.join(EVENTS_HEADER)}", row=1
            )
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(EVENTS_HEADER):
                raise DataFormatError(
                    f"expected {len(EVENTS_HEADER)} fields, got {len(row)}", row=i
                )
            try:
                kind = row[3].strip()
                if kind not in EVENT_KINDS:
                    raise ValueError(f"unknown event kind {kind!r}")
                records.append(
                    EventRecord(
                        pool_id=row[0].strip(),
                        position_id=row[1].strip(),
                        wallet_id=row[2].strip(),
                        kind=kind,
                        block=int(row[4]),
                        timestamp=float(row[5]),
                        amount0=float(row[6]),
                        amount1=float(row[7]),
                        liquidity_delta=float(row[8]),
                        tick_lower=int(row[9]),
                        tick_upper=int(row[10]),
                    )
                )
            except ValueError as exc:
                raise DataFormatError(str(exc), row=i) from None
    records.sort(key=EventRecord.sort_key)
    return records


class PriceFeed:
    """Hourly USD prices per token with nearest-hour matching."""

    def __init__(self, points: list[PricePoint], max_gap: float = DEFAULT_MAX_GAP):
        self.max_gap = max_gap
        series: dict[str, list[tuple[int, float]]] = {}
        seen: set[tuple[int, str]] = set()
        for p in points:
            key = (p.hour, p.token_id)
            if key in seen:
                raise DataFormatError(
                    f"duplicate price row for token {p.token_id!r} at hour {p.hour}"
                )
            seen.add(key)
            series.setdefault(p.token_id, []).append((p.hour, p.usd_price))
        self._hours: dict[str, np.ndarray] = {}
        self._prices: dict[str, np.ndarray] = {}
        for token, rows in series.items():
            rows.sort()
            self._hours[token] = np.array([h for h, _ in rows], dtype=float)
            self._prices[token] = np.array([v for _, v in rows], dtype=float)

    def tokens(self) -> list[str]:
        return sorted(self._hours)

    def usd(self, token_id: str, when: float) -> float:
        """Price at the hour nearest to ``when`` (ties toward the earlier
        hour); raises MissingPriceError beyond the configured gap."""
        hours = self._hours.get(token_id)
        if hours is None or len(hours) == 0:
            raise MissingPriceError(token_id, when)
        i = int(np.searchsorted(hours, when))
        best = None
        if i > 0:
            best = i - 1
        if i < len(hours):
            if best is None or (hours[i] - when) < (when - hours[best]):
                best = i
        gap = abs(hours[best] - when)
        if gap > self.max_gap:
            raise MissingPriceError(token_id, when, gap=gap)
        return float(self._prices[token_id][best])

    def latest(self, token_id: str, cutoff: float | None = None) -> tuple[float, float]:
        """(hour, price) of the latest observation at or before ``cutoff``
        (last available when cutoff is None)."""
        hours = self._hours.get(token_id)
        if hours is None or len(hours) == 0:
            raise MissingPriceError(token_id, cutoff if cutoff is not None else 0.0)
        if cutoff is None:
            return float(hours[-1]), float(self._prices[token_id][-1])
        i = int(np.searchsorted(hours, cutoff, side="right"))
        if i == 0:
            # nearest-available: nothing before the cutoff, use the first
            i = 1
        return float(hours[i - 1]), float(self._prices[token_id][i - 1])

    def ratio_path(self, token0: str, token1: str) -> PricePath:
        """Exchange-ratio series usd(token0)/usd(token1) over the hours
        both tokens are quoted."""
        h0, h1 = self._hours.get(token0), self._hours.get(token1)
        if h0 is None:
            raise MissingPriceError(token0, 0.0)
        if h1 is None:
            raise MissingPriceError(token1, 0.0)
        common, i0, i1 = np.intersect1d(h0, h1, return_indices=True)
        if len(common) == 0:
            raise MissingPriceError(f"{token0}/{token1}", 0.0)
        return PricePath(common, self._prices[token0][i0] / self._prices[token1][i1])

    def end_time(self) -> float:
        return max(float(h[-1]) for h in self._hours.values())


def match_price(feed: PriceFeed, event_time: float, token_id: str) -> float:
    """Nearest-hour USD rate for an event."""
    return feed.usd(token_id, event_time)


def load_prices(path: str, max_gap: float = DEFAULT_MAX_GAP) -> PriceFeed:
    """Read and validate a prices CSV into a PriceFeed."""
    points: list[PricePoint] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != PRICES_HEADER:
            raise DataFormatError(
                f"expected prices header {','.join(PRICES_HEADER)}", row=1
            )
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(PRICES_HEADER):
                raise DataFormatError(
                    f"expected {len(PRICES_HEADER)} fields, got {len(row)}", row=i
                )
            try:
                hour = int(row[0])
                if hour % HOUR:
                    raise ValueError(f"hour {hour} not truncated to {HOUR}s")
                price = float(row[2])
                if not price > 0:
                    raise ValueError(f"usd_price must be positive, got {price}")
                points.append(PricePoint(hour=hour, token_id=row[1].strip(), usd_price=price))
            except ValueError as exc:
                raise DataFormatError(str(exc), row=i) from None
    return PriceFeed(points, max_gap=max_gap)


def positions_from_events(events: list[EventRecord]) -> list[RangePosition]:
    """Group event records into positions (keyed by pool + position id).

    Tick ranges must be consistent across a position's events.
    """
    grouped: dict[tuple[str, str], RangePosition] = {}
    for rec in sorted(events, key=EventRecord.sort_key):
        key = (rec.pool_id, rec.position_id)
        position = grouped.get(key)
        if position is None:
            position = RangePosition(
                position_id=rec.position_id,
                wallet_id=rec.wallet_id,
                pool_id=rec.pool_id,
                tick_lower=rec.tick_lower,
                tick_upper=rec.tick_upper,
            )
            grouped[key] = position
        elif (position.tick_lower, position.tick_upper) != (rec.tick_lower, rec.tick_upper):
            raise DataFormatError(
                f"position {rec.position_id!r} changes tick range across events"
            )
        position.events.append(
            LiquidityEvent(
                kind=rec.kind,
                block=rec.block,
                timestamp=rec.timestamp,
                amount0=rec.amount0,
                amount1=rec.amount1,
                liquidity_delta=rec.liquidity_delta,
            )
        )
    return [grouped[key] for key in sorted(grouped)]
