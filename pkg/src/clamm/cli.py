"""Batch command-line front end.

Subcommands: ``simulate`` (scenario through the tick engine and the
ledger), ``analyze`` (ingest event/price CSVs through the ledger),
``reconstruct`` (batch position reconstruction) and ``mc`` (the scaling
study). Reports land in --out-dir as CSVs with figures rendered
alongside (suppress with --no-figures).

Exit codes: 0 success, 2 configuration error, 3 data error,
4 engine inconsistency (partial fill / unreconstructable observation).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import analytics, reports
from .errors import (
    ClammError,
    ConfigError,
    DataFormatError,
    InconsistentObservationError,
    MissingPriceError,
    PartialFillError,
    PriceCoverageError,
)
from .ingest import PriceFeed, PricePoint, load_events, load_prices
from .mc import default_mc_dict, mc_spec_from_dict, run_mc_study
from .reconstruction import ObservedAdjustment, R_TOKEN0_SHARE, R_TOKEN1_SHARE, reconstruct
from .scenario import default_scenario_dict, load_scenario, run_scenario

RECONSTRUCT_HEADER = ["L", "P_a", "P_b", "r"]


def _ensure_out_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _write_ledger_reports(out_dir: str, entries, figures: bool) -> None:
    totals = analytics.pool_report(entries)
    stats = analytics.segment_durations(entries)
    aggregates, summaries = analytics.wallet_returns(entries)
    reports.write_pool_report(out_dir, totals)
    reports.write_duration_report(out_dir, stats)
    reports.write_wallet_reports(out_dir, aggregates, summaries)
    reports.write_positions_report(out_dir, entries)
    if figures:
        reports.render_fees_vs_il(out_dir, totals)
        reports.render_durations(out_dir, stats)
        reports.render_wallets(out_dir, summaries)


def cmd_simulate(args) -> int:
    if args.print_config:
        if args.config:
            config = load_scenario(args.config)
            document = {
                "pool": {
                    "fee_tier": config.fee_tier,
                    "initial_price": config.initial_price,
                    "tick_spacing": config.tick_spacing,
                    "token0": config.token0,
                    "token1": config.token1,
                },
                "positions": [vars(p) for p in config.positions],
                "path": {
                    "file": config.path_file,
                    "gbm": None if config.gbm is None else vars(config.gbm),
                },
                "numeraire": config.numeraire,
                "filter_below_usd": config.filter_below_usd,
            }
        else:
            document = default_scenario_dict()
        print(json.dumps(document, indent=2, sort_keys=True))
        return 0
    if not args.config:
        raise ConfigError("simulate requires --config (or --print-config)")
    config = load_scenario(args.config)
    if args.numeraire:
        config.numeraire = args.numeraire
    if args.seed is not None and config.gbm is not None:
        config.gbm.seed = args.seed
    result = run_scenario(config)

    out_dir = _ensure_out_dir(args.out_dir)
    reports.write_events(out_dir, result.events)
    reports.write_prices(out_dir, result.price_rows)
    reports.write_trades(out_dir, result.trades)

    feed = PriceFeed([PricePoint(h, tok, p) for h, tok, p in result.price_rows])
    entries = analytics.build_ledger(
        result.events,
        feed,
        numeraire=config.numeraire,
        filter_below_usd=config.filter_below_usd,
    )
    _write_ledger_reports(out_dir, entries, not args.no_figures)
    if not args.no_figures:
        reports.render_price_path(out_dir, result.path)
    return 0


def cmd_analyze(args) -> int:
    events = load_events(args.events)
    feed = load_prices(args.prices)
    entries = analytics.build_ledger(
        events,
        feed,
        numeraire=args.numeraire or "token1",
        filter_below_usd=args.filter_below_usd,
    )
    out_dir = _ensure_out_dir(args.out_dir)
    _write_ledger_reports(out_dir, entries, not args.no_figures)
    return 0


def cmd_reconstruct(args) -> int:
    convention = R_TOKEN0_SHARE if args.token0_share else R_TOKEN1_SHARE
    rows = []
    with open(args.input, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != RECONSTRUCT_HEADER:
            raise DataFormatError(
                f"expected header {','.join(RECONSTRUCT_HEADER)}", row=1
            )
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                obs = ObservedAdjustment(
                    liquidity=float(row[0]),
                    price_lower=float(row[1]),
                    price_upper=float(row[2]),
                    ratio=float(row[3]),
                )
            except (ValueError, IndexError) as exc:
                raise DataFormatError(str(exc), row=i) from None
            state = reconstruct(obs, convention=convention)
            rows.append(
                [obs.liquidity, obs.price_lower, obs.price_upper, obs.ratio,
                 state.token0, state.token1, state.price, state.tick,
                 state.boundary or ""]
            )
    out_dir = _ensure_out_dir(args.out_dir)
    reports.write_csv(
        os.path.join(out_dir, "reconstructed.csv"),
        RECONSTRUCT_HEADER
        + ["token0_amount", "token1_amount", "internal_price", "tick", "boundary"],
        rows,
    )
    return 0


def cmd_mc(args) -> int:
    if args.print_config:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                spec = mc_spec_from_dict(json.load(fh))
            document = {
                "s0": spec.s0, "drift": spec.drift, "volatility": spec.volatility,
                "step": spec.step, "horizons": spec.horizons, "count": spec.count,
                "seed": spec.seed, "fee_rate": spec.fee_rate,
                "volume_per_step": spec.volume_per_step,
            }
        else:
            document = default_mc_dict()
        print(json.dumps(document, indent=2, sort_keys=True))
        return 0
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config!r} is not valid JSON: {exc}") from None
        spec = mc_spec_from_dict(raw)
    else:
        spec = mc_spec_from_dict(default_mc_dict())
    result = run_mc_study(spec, seed=args.seed)
    out_dir = _ensure_out_dir(args.out_dir)
    reports.write_mc_report(out_dir, result.horizons, result.median_abs_il, result.fees)
    reports.write_mc_fit(out_dir, result.fits)
    if not args.no_figures:
        reports.render_mc_scaling(
            out_dir, result.horizons, result.median_abs_il, result.fees, result.fits
        )
    print(
        f"median |IL| exponent {result.fits['il'][0]:.3f}, "
        f"fee exponent {result.fits['fees'][0]:.3f}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clamm",
        description="Concentrated-liquidity AMM analytics and simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario through the pool simulator and ledger")
    sim.add_argument("--config", help="scenario JSON document")
    sim.add_argument("--out-dir", default="out", help="report directory")
    sim.add_argument("--seed", type=int, default=None, help="override the GBM seed")
    sim.add_argument("--numeraire", choices=("token0", "token1", "usd"), default=None)
    sim.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    sim.add_argument("--print-config", action="store_true",
                     help="print the resolved configuration and exit")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="analyze an event log against an hourly price feed")
    ana.add_argument("--events", required=True, help="events CSV")
    ana.add_argument("--prices", required=True, help="hourly prices CSV")
    ana.add_argument("--out-dir", default="out", help="report directory")
    ana.add_argument("--numeraire", choices=("token0", "token1", "usd"), default=None)
    ana.add_argument("--filter-below-usd", type=float, default=1.0,
                     help="wallet analysis drops positions opened below this value")
    ana.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    ana.set_defaults(func=cmd_analyze)

    rec = sub.add_parser("reconstruct", help="solve observed adjustments into position states")
    rec.add_argument("input", help="observations CSV with header L,P_a,P_b,r")
    rec.add_argument("--out-dir", default="out", help="report directory")
    rec.add_argument("--token0-share", action="store_true",
                     help="read r as the token0 share x/(x+y) instead of y/(x+y)")
    rec.set_defaults(func=cmd_reconstruct)

    mc = sub.add_parser("mc", help="Monte Carlo scaling study of IL and fees vs horizon")
    mc.add_argument("--config", help="study JSON document")
    mc.add_argument("--out-dir", default="out", help="report directory")
    mc.add_argument("--seed", type=int, default=None, help="override the study seed")
    mc.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    mc.add_argument("--print-config", action="store_true",
                    help="print the resolved configuration and exit")
    mc.set_defaults(func=cmd_mc)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (DataFormatError, MissingPriceError, PriceCoverageError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (PartialFillError, InconsistentObservationError) as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ClammError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
