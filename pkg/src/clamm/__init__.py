"""Concentrated-liquidity AMM analytics and simulation toolkit."""

from .curves import (
    Holdings,
    LeverageProfile,
    RangeBounds,
    clamm_holdings,
    clamm_value,
    cpamm_il,
    cpamm_value,
    geometric_mean_price,
    hodl_value,
    leverage_requirements,
    liquidity_notional,
)
from .errors import (
    ClammError,
    ConfigError,
    DataFormatError,
    InconsistentObservationError,
    MissingPriceError,
    PartialFillError,
    PriceCoverageError,
)
from .ledger import (
    ILBreakdown,
    ImputedPosition,
    LiquidityEvent,
    RangePosition,
    actual_il,
    fees_usd,
    il_usd,
    minimal_il,
    novate,
    out_of_range_il,
    position_breakdown,
)
from .paths import PricePath, generate_gbm_paths
from .pool import PoolState, SwapResult, replay
from .reconstruction import ObservedAdjustment, ReconstructedState, reconstruct
from .tickmath import FeeGrowthAccumulator, FeeTier, fee_growth_inside, price_to_tick, tick_to_price

__version__ = "0.1.0"

__all__ = [
    "ClammError",
    "ConfigError",
    "DataFormatError",
    "FeeGrowthAccumulator",
    "FeeTier",
    "Holdings",
    "ILBreakdown",
    "ImputedPosition",
    "InconsistentObservationError",
    "LeverageProfile",
    "LiquidityEvent",
    "MissingPriceError",
    "ObservedAdjustment",
    "PartialFillError",
    "PoolState",
    "PriceCoverageError",
    "PricePath",
    "RangeBounds",
    "RangePosition",
    "ReconstructedState",
    "SwapResult",
    "actual_il",
    "clamm_holdings",
    "clamm_value",
    "cpamm_il",
    "cpamm_value",
    "fee_growth_inside",
    "fees_usd",
    "generate_gbm_paths",
    "geometric_mean_price",
    "hodl_value",
    "il_usd",
    "leverage_requirements",
    "liquidity_notional",
    "minimal_il",
    "novate",
    "out_of_range_il",
    "position_breakdown",
    "price_to_tick",
    "reconstruct",
    "replay",
    "tick_to_price",
]
