"""Scenario configuration and the simulation driver.

A scenario is one pool, a set of LP position specs and an external price
path (a CSV file or GBM parameters, mutually exclusive). Running it
replays the path through the tick engine with arbitrage at every point,
mints/burns the positions at their scheduled times (snapped to path
points), accrues fees through the fee-growth accounting, and emits the
same artifacts an on-chain ingest would provide: an event log and an
hourly USD price feed (token1 is the synthetic USD parity asset), plus
the raw trade log. Downstream analytics then treat simulated and
ingested data identically.

Position entries execute before the point's arbitrage trade and exits
after it, so a position entered and exited at the same point (a flash
position, block = path index) sits in the pool for exactly that point's
trading.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .ingest import HOUR, EventRecord
from .paths import PricePath, generate_gbm_paths, load_price_path
from .pool import PoolState, SwapResult
from .tickmath import FeeTier, align_down, price_to_tick

DEFAULT_TOKEN0 = "RISK"
DEFAULT_TOKEN1 = "NUM"


@dataclass
class PositionSpec:
    position_id: str
    wallet_id: str
    lower_price: float
    upper_price: float
    liquidity: float
    entry_time: float
    exit_time: float | None = None

    def validate(self) -> None:
        if not 0 < self.lower_price < self.upper_price:
            raise ConfigError(
                f"position {self.position_id}: need 0 < lower_price < upper_price"
            )
        if not self.liquidity > 0:
            raise ConfigError(f"position {self.position_id}: liquidity must be positive")
        if self.exit_time is not None and self.exit_time < self.entry_time:
            raise ConfigError(f"position {self.position_id}: exit before entry")


@dataclass
class GbmSpec:
    """GBM path parameters for a scenario. Times are UNIX-style seconds;
    drift and volatility are quoted per hour (so volatility is the
    standard deviation of hourly log-returns)."""

    s0: float = 1.0
    drift: float = 0.0
    volatility: float = 0.01
    horizon: float = 72 * HOUR
    step: float = HOUR
    seed: int = 7
    count: int = 1


@dataclass
class ScenarioConfig:
    fee_tier: int = 3000
    initial_price: float = 1.0
    tick_spacing: int | None = None
    token0: str = DEFAULT_TOKEN0
    token1: str = DEFAULT_TOKEN1
    positions: list[PositionSpec] = field(default_factory=list)
    path_file: str | None = None
    gbm: GbmSpec | None = None
    numeraire: str = "token1"
    filter_below_usd: float = 1.0

    @property
    def pool_id(self) -> str:
        return f"{self.token0}-{self.token1}-{self.fee_tier}"

    def validate(self) -> None:
        if self.fee_tier not in (500, 3000, 10000):
            raise ConfigError(f"unknown fee tier {self.fee_tier!r}")
        if not self.initial_price > 0:
            raise ConfigError("initial_price must be positive")
        if (self.path_file is None) == (self.gbm is None):
            raise ConfigError("exactly one of path file and GBM parameters is required")
        if self.numeraire not in ("token0", "token1", "usd"):
            raise ConfigError(f"unknown numeraire mode {self.numeraire!r}")
        for spec in self.positions:
            spec.validate()


def default_scenario_dict() -> dict:
    """The fully-resolved default configuration (what --print-config shows)."""
    return {
        "pool": {
            "fee_tier": 3000,
            "initial_price": 1.0,
            "tick_spacing": None,
            "token0": DEFAULT_TOKEN0,
            "token1": DEFAULT_TOKEN1,
        },
        "positions": [
            {
                "position_id": "pos-1",
                "wallet_id": "wallet-1",
                "lower_price": 0.8,
                "upper_price": 1.25,
                "liquidity": 1000.0,
                "entry_time": 0,
                "exit_time": None,
            }
        ],
        "path": {
            "file": None,
            "gbm": {
                "s0": 1.0,
                "drift": 0.0,
                "volatility": 0.01,
                "horizon": 72 * HOUR,
                "step": HOUR,
                "seed": 7,
            },
        },
        "numeraire": "token1",
        "filter_below_usd": 1.0,
    }


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    """Parse and validate a scenario configuration document."""
    try:
        pool_raw = raw.get("pool", {})
        path_raw = raw.get("path", {})
        gbm_raw = path_raw.get("gbm")
        gbm = None
        if gbm_raw is not None:
            gbm = GbmSpec(
                s0=float(gbm_raw.get("s0", 1.0)),
                drift=float(gbm_raw.get("drift", 0.0)),
                volatility=float(gbm_raw.get("volatility", 0.01)),
                horizon=float(gbm_raw.get("horizon", 72 * HOUR)),
                step=float(gbm_raw.get("step", HOUR)),
                seed=int(gbm_raw.get("seed", 7)),
            )
        positions = [
            PositionSpec(
                position_id=str(p.get("position_id", f"pos-{i + 1}")),
                wallet_id=str(p.get("wallet_id", f"wallet-{i + 1}")),
                lower_price=float(p["lower_price"]),
                upper_price=float(p["upper_price"]),
                liquidity=float(p["liquidity"]),
                entry_time=float(p.get("entry_time", 0.0)),
                exit_time=None if p.get("exit_time") is None else float(p["exit_time"]),
            )
            for i, p in enumerate(raw.get("positions", []))
        ]
        spacing = pool_raw.get("tick_spacing")
        config = ScenarioConfig(
            fee_tier=int(pool_raw.get("fee_tier", 3000)),
            initial_price=float(pool_raw.get("initial_price", 1.0)),
            tick_spacing=None if spacing is None else int(spacing),
            token0=str(pool_raw.get("token0", DEFAULT_TOKEN0)),
            token1=str(pool_raw.get("token1", DEFAULT_TOKEN1)),
            positions=positions,
            path_file=path_raw.get("file"),
            gbm=gbm,
            numeraire=str(raw.get("numeraire", "token1")),
            filter_below_usd=float(raw.get("filter_below_usd", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed scenario config: {exc}") from None
    config.validate()
    return config


def load_scenario(path: str) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from None
    return scenario_from_dict(raw)


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    path: PricePath
    pool: PoolState
    events: list[EventRecord]
    price_rows: list[tuple[int, str, float]]  # (hour, token_id, usd_price)
    trades: list[tuple[float, SwapResult]]


def _snap_range(pool: PoolState, lower_price: float, upper_price: float) -> tuple[int, int]:
    spacing = pool.fee_tier.spacing
    lower = align_down(price_to_tick(lower_price), spacing)
    upper = align_down(price_to_tick(upper_price), spacing)
    if upper <= lower:
        upper = lower + spacing
    return lower, upper


def run_scenario(config: ScenarioConfig, seed: int | None = None) -> ScenarioResult:
    """Execute a scenario and collect its artifacts."""
    config.validate()
    if config.path_file is not None:
        path = load_price_path(config.path_file)
    else:
        gbm = config.gbm
        # drift/volatility are per hour; rescale the generated hour grid
        # back to second timestamps
        hourly = generate_gbm_paths(
            gbm.s0,
            gbm.drift,
            gbm.volatility,
            gbm.horizon / HOUR,
            gbm.step / HOUR,
            1,
            gbm.seed if seed is None else seed,
        )[0]
        path = PricePath(hourly.times * HOUR, hourly.prices)

    tier = FeeTier(config.fee_tier, spacing=config.tick_spacing)
    pool = PoolState(config.initial_price, tier)

    # Schedule entries/exits on their nearest path points.
    entries_at: dict[int, list[PositionSpec]] = {}
    exits_at: dict[int, list[PositionSpec]] = {}
    for spec in config.positions:
        entry_idx = path.nearest_index(spec.entry_time)
        entries_at.setdefault(entry_idx, []).append(spec)
        if spec.exit_time is not None:
            exit_idx = max(path.nearest_index(spec.exit_time), entry_idx)
            exits_at.setdefault(exit_idx, []).append(spec)

    ticks_of: dict[str, tuple[int, int]] = {}
    growth_at_entry: dict[str, tuple[float, float]] = {}
    events: list[EventRecord] = []
    trades: list[tuple[float, SwapResult]] = []

    def record(spec: PositionSpec, kind: str, block: int, t: float,
               amount0: float = 0.0, amount1: float = 0.0, delta: float = 0.0) -> None:
        lower, upper = ticks_of[spec.position_id]
        events.append(
            EventRecord(
                pool_id=config.pool_id,
                position_id=spec.position_id,
                wallet_id=spec.wallet_id,
                kind=kind,
                block=block,
                timestamp=t,
                amount0=amount0,
                amount1=amount1,
                liquidity_delta=delta,
                tick_lower=lower,
                tick_upper=upper,
            )
        )

    def settle(spec: PositionSpec, block: int, t: float, close: bool) -> None:
        lower, upper = ticks_of[spec.position_id]
        inside = pool.growth_inside(lower, upper)
        start = growth_at_entry[spec.position_id]
        fee0 = max(0.0, (inside[0] - start[0]) * spec.liquidity)
        fee1 = max(0.0, (inside[1] - start[1]) * spec.liquidity)
        if close:
            a0, a1 = pool.remove_liquidity(lower, upper, spec.liquidity)
            record(spec, "decrease", block, t, a0, a1, -spec.liquidity)
        if fee0 or fee1 or close:
            record(spec, "collect", block, t, fee0, fee1, 0.0)
        if close:
            record(spec, "burn", block, t)

    for i, (t, price) in enumerate(zip(path.times, path.prices)):
        t = float(t)
        for spec in entries_at.get(i, ()):
            lower, upper = _snap_range(pool, spec.lower_price, spec.upper_price)
            ticks_of[spec.position_id] = (lower, upper)
            a0, a1 = pool.add_liquidity(lower, upper, spec.liquidity)
            growth_at_entry[spec.position_id] = pool.growth_inside(lower, upper)
            record(spec, "mint", i, t, a0, a1, spec.liquidity)
        result = pool.arbitrage_to(float(price))
        if not result.is_empty:
            trades.append((t, result))
        for spec in exits_at.get(i, ()):
            settle(spec, i, t, close=True)

    # Positions still open settle their uncollected fees at the cutoff.
    cutoff_idx = len(path) - 1
    cutoff_t = float(path.times[-1])
    for spec in config.positions:
        if spec.exit_time is None and spec.position_id in ticks_of:
            settle(spec, cutoff_idx, cutoff_t, close=False)

    # Synthetic hourly USD feed: token1 at parity, token0 at the path ratio.
    price_rows: list[tuple[int, str, float]] = []
    seen_hours: dict[int, float] = {}
    for t, price in zip(path.times, path.prices):
        seen_hours[int(t // HOUR) * HOUR] = float(price)  # last sample of each hour
    for hour in sorted(seen_hours):
        price_rows.append((hour, config.token0, seen_hours[hour]))
        price_rows.append((hour, config.token1, 1.0))

    events.sort(key=EventRecord.sort_key)
    return ScenarioResult(
        config=config,
        path=path,
        pool=pool,
        events=events,
        price_rows=price_rows,
        trades=trades,
    )
