"""Cohort analytics over a novated position ledger.

Builds per-position ledger entries (fees, IL breakdown, duration bucket,
time-weighted average liquidity) from ingested events plus an hourly USD
feed, then aggregates them: per-pool totals, duration segmentation with
IL/fee ratios, and wallet-level return splits.

Numeraire modes: percentage IL is computed against token1 by default,
against token0 on request (the two agree -- an invariance the tests
enforce), or against USD, where IL can legitimately come out positive;
USD-mode numbers are reported, never asserted negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .ingest import EventRecord, PriceFeed, pool_tokens, positions_from_events
from .ledger import (
    ILBreakdown,
    ImputedPosition,
    RangePosition,
    composition,
    fees_usd,
    in_range_runs,
    novate,
    position_breakdown,
)
from .paths import PricePath

NUMERAIRE_MODES = ("token1", "token0", "usd")

HOUR = 3600.0
DAY = 86400.0
WEEK = 7 * DAY
MONTH = 30 * DAY  # fixed 30-day month for bucket bounds

DURATION_BUCKETS = ("flash", "≤1h", "1h–1d", "1d–1w", "1w–1m", ">1m")


def bucket_for(duration: float, flash: bool) -> str:
    """Assign a lifetime to its (unique) duration bucket."""
    if flash:
        return "flash"
    if duration <= HOUR:
        return "≤1h"
    if duration <= DAY:
        return "1h–1d"
    if duration <= WEEK:
        return "1d–1w"
    if duration <= MONTH:
        return "1w–1m"
    return ">1m"


@dataclass
class LedgerEntry:
    """One position's analytics row."""

    pool_id: str
    position_id: str
    wallet_id: str
    open_time: float
    close_time: float
    flash: bool
    bucket: str
    breakdown: ILBreakdown
    net_usd: float
    twal_usd: float
    open_value_usd: float
    filtered: bool
    segments: list[ImputedPosition] = field(default_factory=list)

    @property
    def duration(self) -> float:
        return self.close_time - self.open_time


@dataclass
class BucketStats:
    count: int = 0
    fees_usd: float = 0.0
    il_usd: float = 0.0


@dataclass
class WalletAggregate:
    wallet_id: str
    pool_id: str
    fees_usd: float
    il_usd: float
    net_usd: float
    roi: float
    sign: str  # "positive" (net >= 0) or "negative"


@dataclass
class PoolTotals:
    pool_id: str
    fees_usd: float = 0.0
    minimal_il_usd: float = 0.0
    out_of_range_il_usd: float = 0.0
    actual_il_usd: float = 0.0
    net_usd: float = 0.0


@dataclass
class WalletSummary:
    pool_id: str
    n_wallets: int
    n_positive: int
    n_negative: int
    negative_share: float
    mean_positive_usd: float
    mean_negative_usd: float


def _usd_mode_breakdown(
    segments: list[ImputedPosition],
    ratios: PricePath,
    feed: PriceFeed,
    token0: str,
    token1: str,
) -> ILBreakdown:
    """IL decomposition measured in USD terms (an external numeraire:
    the sign guarantee of the in-pool measures does not apply)."""
    minimal_usd = 0.0
    actual_usd = 0.0
    base_usd = 0.0
    for seg in segments:
        u0 = feed.usd(token0, seg.close_time)
        u1 = feed.usd(token1, seg.close_time)
        value_close = seg.close_token0 * u0 + seg.close_token1 * u1
        value_hodl = seg.open_token0 * u0 + seg.open_token1 * u1
        actual_usd += value_close - value_hodl
        base_usd += value_hodl
        seg_minimal_pct = 0.0
        for run in in_range_runs(seg, ratios):
            (t_first, first), (t_last, last) = run[0], run[-1]
            if len(run) < 2 or first == last:
                continue
            ru0 = feed.usd(token0, t_last)
            ru1 = feed.usd(token1, t_last)
            start0, start1 = composition(seg.bounds, seg.liquidity, first)
            end0, end1 = composition(seg.bounds, seg.liquidity, last)
            hodl = start0 * ru0 + start1 * ru1
            seg_minimal_pct += (end0 * ru0 + end1 * ru1) / hodl - 1.0
        minimal_usd += seg_minimal_pct * value_hodl
    out_usd = actual_usd - minimal_usd
    actual_usd = minimal_usd + out_usd
    minimal_pct = minimal_usd / base_usd if base_usd > 0 else 0.0
    out_pct = out_usd / base_usd if base_usd > 0 else 0.0
    return ILBreakdown(
        minimal_pct=minimal_pct,
        out_of_range_pct=out_pct,
        actual_pct=minimal_pct + out_pct,
        minimal_usd=minimal_usd,
        out_of_range_usd=out_usd,
        actual_usd=actual_usd,
    )


def _position_twal(
    segments: list[ImputedPosition],
    ratios: PricePath,
    feed: PriceFeed,
    token0: str,
    token1: str,
) -> float:
    """Time-weighted average USD value of the position: the left-step
    time integral of its value at the feed's sample times, divided by
    the active duration."""
    duration = segments[-1].close_time - segments[0].open_time
    if duration <= 0:
        return 0.0
    integral = 0.0
    for seg in segments:
        samples = [(seg.open_time, seg.open_ratio)]
        samples += ratios.between(seg.open_time, seg.close_time)
        samples.append((seg.close_time, seg.close_ratio))
        for (t, ratio), (t_next, _) in zip(samples, samples[1:]):
            qty0, qty1 = composition(seg.bounds, seg.liquidity, ratio)
            value = qty0 * feed.usd(token0, t) + qty1 * feed.usd(token1, t)
            integral += value * (t_next - t)
    return integral / duration


def _open_value_usd(position: RangePosition, feed: PriceFeed, token0: str, token1: str) -> float:
    """USD value of the opening deposit, from the first liquidity event's
    recorded amounts at its nearest-hour rates."""
    for event in position.sorted_events():
        if event.changes_liquidity and event.liquidity_delta > 0:
            return event.amount0 * feed.usd(token0, event.timestamp) + event.amount1 * feed.usd(
                token1, event.timestamp
            )
    return 0.0


def build_ledger(
    events: list[EventRecord],
    feed: PriceFeed,
    numeraire: str = "token1",
    filter_below_usd: float = 1.0,
) -> list[LedgerEntry]:
    """Novate every position and compute its analytics row.

    Positions worth less than ``filter_below_usd`` at open stay in the
    ledger but are flagged so the wallet analysis can drop them without
    losing data.
    """
    if numeraire not in NUMERAIRE_MODES:
        raise ValueError(f"numeraire must be one of {NUMERAIRE_MODES}, got {numeraire!r}")
    positions = positions_from_events(events)
    ratio_cache: dict[str, PricePath] = {}
    entries: list[LedgerEntry] = []
    for position in positions:
        token0, token1, _fee = pool_tokens(position.pool_id)
        ratios = ratio_cache.get(position.pool_id)
        if ratios is None:
            ratios = feed.ratio_path(token0, token1)
            ratio_cache[position.pool_id] = ratios
        spot_token = token0 if numeraire == "token0" else token1
        segments = novate(
            position, ratios, numeraire_spot_usd=lambda t, tok=spot_token: feed.usd(tok, t)
        )
        if not segments:
            continue
        if numeraire == "usd":
            breakdown = _usd_mode_breakdown(segments, ratios, feed, token0, token1)
        else:
            breakdown = position_breakdown(segments, ratios, numeraire)
        breakdown.fees_usd = fees_usd(
            position,
            usd0=lambda t: feed.usd(token0, t),
            usd1=lambda t: feed.usd(token1, t),
        )
        open_time = segments[0].open_time
        close_time = segments[-1].close_time
        open_block = segments[0].open_block
        close_block = segments[-1].close_block
        flash = open_block is not None and close_block is not None and open_block == close_block
        open_value = _open_value_usd(position, feed, token0, token1)
        entries.append(
            LedgerEntry(
                pool_id=position.pool_id,
                position_id=position.position_id,
                wallet_id=position.wallet_id,
                open_time=open_time,
                close_time=close_time,
                flash=flash,
                bucket=bucket_for(close_time - open_time, flash),
                breakdown=breakdown,
                net_usd=breakdown.fees_usd + breakdown.actual_usd,
                twal_usd=_position_twal(segments, ratios, feed, token0, token1),
                open_value_usd=open_value,
                filtered=open_value < filter_below_usd,
                segments=segments,
            )
        )
    entries.sort(key=lambda e: (e.pool_id, e.position_id))
    return entries


def roi(entry: LedgerEntry) -> float:
    """Net USD return over time-weighted average liquidity; NaN for
    zero-duration or zero-value positions (excluded from means)."""
    if entry.duration <= 0 or entry.twal_usd <= 0:
        return math.nan
    return entry.net_usd / entry.twal_usd


def segment_durations(entries: list[LedgerEntry]) -> dict[str, BucketStats]:
    """Positions, fees and actual IL per duration bucket."""
    stats = {label: BucketStats() for label in DURATION_BUCKETS}
    for entry in entries:
        s = stats[entry.bucket]
        s.count += 1
        s.fees_usd += entry.breakdown.fees_usd
        s.il_usd += entry.breakdown.actual_usd
    return stats


def il_fee_ratio(stats: BucketStats) -> float:
    """|IL| / fees: the cost/income ratio of a bucket. NaN when the
    bucket earned no fees."""
    if stats.fees_usd <= 0:
        return math.nan
    return abs(stats.il_usd) / stats.fees_usd


def rorac(stats: BucketStats) -> float:
    """fees / |IL| - 1, diverging to +inf when there is no IL at risk."""
    if stats.il_usd == 0:
        return math.inf
    return stats.fees_usd / abs(stats.il_usd) - 1.0


def wallet_returns(
    entries: list[LedgerEntry],
    filter_below_usd: float = 1.0,
) -> tuple[list[WalletAggregate], list[WalletSummary]]:
    """Aggregate the ledger by (pool, wallet) and split by return sign.

    Positions whose opening value is below the threshold are dropped
    here (they remain in the ledger itself). Wallets are never linked
    across addresses.
    """
    kept = [e for e in entries if e.open_value_usd >= filter_below_usd]
    grouped: dict[tuple[str, str], list[LedgerEntry]] = {}
    for entry in kept:
        grouped.setdefault((entry.pool_id, entry.wallet_id), []).append(entry)

    aggregates: list[WalletAggregate] = []
    for (pool_id, wallet_id), rows in sorted(grouped.items()):
        fees = sum(r.breakdown.fees_usd for r in rows)
        il = sum(r.breakdown.actual_usd for r in rows)
        net = fees + il
        total_duration = sum(r.duration for r in rows)
        integral = sum(r.twal_usd * r.duration for r in rows)
        wallet_twal = integral / total_duration if total_duration > 0 else 0.0
        aggregates.append(
            WalletAggregate(
                wallet_id=wallet_id,
                pool_id=pool_id,
                fees_usd=fees,
                il_usd=il,
                net_usd=net,
                roi=net / wallet_twal if wallet_twal > 0 else math.nan,
                sign="positive" if net >= 0 else "negative",
            )
        )

    summaries: list[WalletSummary] = []
    by_pool: dict[str, list[WalletAggregate]] = {}
    for agg in aggregates:
        by_pool.setdefault(agg.pool_id, []).append(agg)
    for pool_id, aggs in sorted(by_pool.items()):
        positive = [a.net_usd for a in aggs if a.sign == "positive"]
        negative = [a.net_usd for a in aggs if a.sign == "negative"]
        summaries.append(
            WalletSummary(
                pool_id=pool_id,
                n_wallets=len(aggs),
                n_positive=len(positive),
                n_negative=len(negative),
                negative_share=len(negative) / len(aggs) if aggs else math.nan,
                mean_positive_usd=sum(positive) / len(positive) if positive else math.nan,
                mean_negative_usd=sum(negative) / len(negative) if negative else math.nan,
            )
        )
    return aggregates, summaries


def pool_report(entries: list[LedgerEntry]) -> list[PoolTotals]:
    """Per-pool fee and IL totals (minimal IL emitted alongside actual)."""
    totals: dict[str, PoolTotals] = {}
    for entry in entries:
        row = totals.setdefault(entry.pool_id, PoolTotals(pool_id=entry.pool_id))
        row.fees_usd += entry.breakdown.fees_usd
        row.minimal_il_usd += entry.breakdown.minimal_usd
        row.out_of_range_il_usd += entry.breakdown.out_of_range_usd
        row.actual_il_usd += entry.breakdown.actual_usd
        row.net_usd += entry.net_usd
    return [totals[k] for k in sorted(totals)]
