"""Report emission: delimited files plus rendered figures.

Every report is a deterministic CSV (stable row order, stable float
formatting) so runs with the same inputs are byte-identical; the report
path also renders a matplotlib figure next to each CSV unless figures
are disabled. Schemas are documented in the README.
"""

from __future__ import annotations

import csv
import math
import os

from .analytics import (
    DURATION_BUCKETS,
    BucketStats,
    LedgerEntry,
    PoolTotals,
    WalletAggregate,
    WalletSummary,
    il_fee_ratio,
    roi,
    rorac,
)
from .ingest import EVENTS_HEADER, PRICES_HEADER


def fmt(value: float) -> str:
    """Stable scalar formatting: NaN/inf sentinels spelled out, floats
    at 12 significant digits."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.12g}"


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else fmt(cell) for cell in row])


# ----- report writers ------------------------------------------------------


def write_pool_report(out_dir: str, totals: list[PoolTotals]) -> str:
    path = os.path.join(out_dir, "pool_report.csv")
    write_csv(
        path,
        ["pool_id", "fees_usd", "minimal_il_usd", "out_of_range_il_usd", "actual_il_usd", "net_usd"],
        [
            [t.pool_id, t.fees_usd, t.minimal_il_usd, t.out_of_range_il_usd, t.actual_il_usd, t.net_usd]
            for t in totals
        ],
    )
    return path


def write_duration_report(out_dir: str, stats: dict[str, BucketStats]) -> str:
    path = os.path.join(out_dir, "duration_report.csv")
    write_csv(
        path,
        ["bucket", "count", "fees_usd", "actual_il_usd", "il_fee_ratio", "rorac"],
        [
            [label, stats[label].count, stats[label].fees_usd, stats[label].il_usd,
             il_fee_ratio(stats[label]), rorac(stats[label])]
            for label in DURATION_BUCKETS
        ],
    )
    return path


def write_wallet_reports(
    out_dir: str,
    aggregates: list[WalletAggregate],
    summaries: list[WalletSummary],
) -> tuple[str, str]:
    wallets_path = os.path.join(out_dir, "wallet_report.csv")
    write_csv(
        wallets_path,
        ["pool_id", "wallet_id", "fees_usd", "il_usd", "net_usd", "roi", "sign"],
        [
            [a.pool_id, a.wallet_id, a.fees_usd, a.il_usd, a.net_usd, a.roi, a.sign]
            for a in aggregates
        ],
    )
    summary_path = os.path.join(out_dir, "wallet_summary.csv")
    write_csv(
        summary_path,
        ["pool_id", "n_wallets", "n_positive", "n_negative", "negative_share",
         "mean_positive_usd", "mean_negative_usd"],
        [
            [s.pool_id, s.n_wallets, s.n_positive, s.n_negative, s.negative_share,
             s.mean_positive_usd, s.mean_negative_usd]
            for s in summaries
        ],
    )
    return wallets_path, summary_path


def write_positions_report(out_dir: str, entries: list[LedgerEntry]) -> str:
    path = os.path.join(out_dir, "positions_report.csv")
    write_csv(
        path,
        ["pool_id", "position_id", "wallet_id", "open_time", "close_time",
         "duration_seconds", "bucket", "flash", "filtered", "fees_usd",
         "minimal_il_usd", "out_of_range_il_usd", "actual_il_usd", "net_usd",
         "twal_usd", "roi"],
        [
            [e.pool_id, e.position_id, e.wallet_id, e.open_time, e.close_time,
             e.duration, e.bucket, e.flash, e.filtered, e.breakdown.fees_usd,
             e.breakdown.minimal_usd, e.breakdown.out_of_range_usd,
             e.breakdown.actual_usd, e.net_usd, e.twal_usd, roi(e)]
            for e in entries
        ],
    )
    return path


def write_trades(out_dir: str, trades) -> str:
    path = os.path.join(out_dir, "trades.csv")
    write_csv(
        path,
        ["timestamp", "direction", "amount_in", "amount_out", "fee_paid",
         "ticks_crossed", "end_price"],
        [
            [t, r.direction, r.amount_in, r.amount_out, r.fee_paid,
             ";".join(str(k) for k in r.ticks_crossed), r.end_price]
            for t, r in trades
        ],
    )
    return path


def write_events(out_dir: str, events) -> str:
    path = os.path.join(out_dir, "events.csv")
    write_csv(
        path,
        EVENTS_HEADER,
        [
            [e.pool_id, e.position_id, e.wallet_id, e.kind, e.block, e.timestamp,
             e.amount0, e.amount1, e.liquidity_delta, e.tick_lower, e.tick_upper]
            for e in events
        ],
    )
    return path


def write_prices(out_dir: str, price_rows) -> str:
    path = os.path.join(out_dir, "prices.csv")
    write_csv(path, PRICES_HEADER, [[h, token, p] for h, token, p in price_rows])
    return path


def write_mc_report(out_dir: str, horizons, median_abs_il, fees) -> str:
    path = os.path.join(out_dir, "mc_scaling.csv")
    write_csv(
        path,
        ["horizon", "median_abs_il", "fees"],
        [[h, m, f] for h, m, f in zip(horizons, median_abs_il, fees)],
    )
    return path


def write_mc_fit(out_dir: str, fits: dict[str, tuple[float, float]]) -> str:
    path = os.path.join(out_dir, "mc_fit.csv")
    write_csv(
        path,
        ["series", "exponent", "intercept"],
        [[name, exponent, intercept] for name, (exponent, intercept) in sorted(fits.items())],
    )
    return path


# ----- figures --------------------------------------------------------------


def _axes(figsize=(7, 4)):
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=figsize)
    return plt, fig, ax


def render_fees_vs_il(out_dir: str, totals: list[PoolTotals]) -> str:
    """Per-pool fees vs actual IL bars, minimal IL marked by a white line."""
    path = os.path.join(out_dir, "fees_vs_il.png")
    plt, fig, ax = _axes()
    pools = [t.pool_id for t in totals]
    xs = range(len(pools))
    ax.bar([x - 0.2 for x in xs], [t.fees_usd for t in totals], width=0.4,
           color="seagreen", label="fees")
    ax.bar([x + 0.2 for x in xs], [abs(t.actual_il_usd) for t in totals], width=0.4,
           color="indianred", label="actual IL")
    for x, t in zip(xs, totals):
        ax.hlines(abs(t.minimal_il_usd), x, x + 0.4, colors="white", linewidth=2)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(pools, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("USD")
    ax.set_title("Fees vs impermanent loss per pool")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_durations(out_dir: str, stats: dict[str, BucketStats]) -> str:
    path = os.path.join(out_dir, "durations.png")
    plt, fig, ax = _axes()
    labels = list(DURATION_BUCKETS)
    xs = range(len(labels))
    ax.bar([x - 0.2 for x in xs], [stats[b].fees_usd for b in labels], width=0.4,
           color="seagreen", label="fees")
    ax.bar([x + 0.2 for x in xs], [abs(stats[b].il_usd) for b in labels], width=0.4,
           color="indianred", label="|IL|")
    ax2 = ax.twinx()
    ax2.plot(list(xs), [stats[b].count for b in labels], color="steelblue",
             marker="o", label="positions")
    ax2.set_ylabel("positions", color="steelblue")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels)
    ax.set_ylabel("USD")
    ax.set_title("Fees and IL by position lifetime")
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_wallets(out_dir: str, summaries: list[WalletSummary]) -> str:
    path = os.path.join(out_dir, "wallets.png")
    plt, fig, ax = _axes()
    pools = [s.pool_id for s in summaries]
    xs = range(len(pools))
    pos = [1.0 - s.negative_share for s in summaries]
    neg = [s.negative_share for s in summaries]
    ax.bar(list(xs), pos, color="seagreen", label="positive")
    ax.bar(list(xs), neg, bottom=pos, color="indianred", label="negative")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(pools, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("share of wallets")
    ax.set_title("Wallets with positive vs negative returns")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_price_path(out_dir: str, path_obj) -> str:
    path = os.path.join(out_dir, "price_path.png")
    plt, fig, ax = _axes()
    ax.plot(path_obj.times, path_obj.prices, color="steelblue", linewidth=1)
    ax.set_xlabel("time")
    ax.set_ylabel("exchange ratio")
    ax.set_title("External price path")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_mc_scaling(out_dir: str, horizons, median_abs_il, fees,
                      fits: dict[str, tuple[float, float]]) -> str:
    path = os.path.join(out_dir, "mc_scaling.png")
    plt, fig, ax = _axes()
    ax.loglog(horizons, median_abs_il, "o-", color="indianred",
              label=f"median |IL| (slope {fits['il'][0]:.2f})")
    ax.loglog(horizons, fees, "s-", color="seagreen",
              label=f"fees (slope {fits['fees'][0]:.2f})")
    ax.set_xlabel("horizon")
    ax.set_ylabel("magnitude")
    ax.set_title("Scaling of IL and fees with horizon")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
