"""Monte Carlo scaling study: how IL and fees grow with horizon.

For a full-range pool driven by drift-free GBM, the per-path IL at a
horizon is the closed-form constant-product IL at that path's terminal
ratio (fee-free reserves depend only on the final price, which the
simulator property tests verify separately). The study measures the
median |IL| across paths at each horizon mark and fits a power law;
fees follow the constant-volume-per-step stand-in model, which is
linear in horizon by construction.

The default parameters put the horizon grid in the regime where the
median |IL| exhibits the square-root-of-time growth the fee comparison
is usually quoted against (percentage IL is quadratic in the typical
price move for short horizons and saturates for very long ones; the
defaults straddle the transition).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .paths import generate_gbm_paths

DEFAULT_HORIZONS = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]


@dataclass
class McSpec:
    s0: float = 1.0
    drift: float = 0.0
    volatility: float = 1.0
    step: float = 1.0
    horizons: list[float] = field(default_factory=lambda: list(DEFAULT_HORIZONS))
    count: int = 10_000
    seed: int = 7
    fee_rate: float = 0.003
    volume_per_step: float = 1.0

    def validate(self) -> None:
        if not self.s0 > 0:
            raise ConfigError("s0 must be positive")
        if self.volatility < 0:
            raise ConfigError("volatility must be nonnegative")
        if not self.step > 0:
            raise ConfigError("step must be positive")
        if self.count < 2:
            raise ConfigError("count must be >= 2")
        if len(self.horizons) < 2:
            raise ConfigError("need at least two horizons to fit a scaling exponent")
        for h in self.horizons:
            steps = h / self.step
            if not math.isclose(steps, round(steps), rel_tol=1e-9) or round(steps) < 1:
                raise ConfigError(f"horizon {h} is not a whole number of steps {self.step}")
        if sorted(self.horizons) != self.horizons:
            raise ConfigError("horizons must be increasing")


def default_mc_dict() -> dict:
    spec = McSpec()
    return {
        "s0": spec.s0,
        "drift": spec.drift,
        "volatility": spec.volatility,
        "step": spec.step,
        "horizons": spec.horizons,
        "count": spec.count,
        "seed": spec.seed,
        "fee_rate": spec.fee_rate,
        "volume_per_step": spec.volume_per_step,
    }


def mc_spec_from_dict(raw: dict) -> McSpec:
    try:
        spec = McSpec(
            s0=float(raw.get("s0", 1.0)),
            drift=float(raw.get("drift", 0.0)),
            volatility=float(raw.get("volatility", 1.0)),
            step=float(raw.get("step", 1.0)),
            horizons=[float(h) for h in raw.get("horizons", DEFAULT_HORIZONS)],
            count=int(raw.get("count", 10_000)),
            seed=int(raw.get("seed", 7)),
            fee_rate=float(raw.get("fee_rate", 0.003)),
            volume_per_step=float(raw.get("volume_per_step", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed mc config: {exc}") from None
    spec.validate()
    return spec


@dataclass
class McResult:
    horizons: list[float]
    median_abs_il: list[float]
    fees: list[float]
    fits: dict[str, tuple[float, float]]  # series -> (exponent, intercept)


def _power_fit(xs, ys) -> tuple[float, float]:
    ys = np.asarray(ys)
    if np.any(ys <= 0):
        return math.nan, math.nan  # degenerate series (e.g. zero volatility)
    slope, intercept = np.polyfit(np.log(np.asarray(xs)), np.log(ys), 1)
    return float(slope), float(intercept)


def run_mc_study(spec: McSpec, seed: int | None = None) -> McResult:
    spec.validate()
    paths = generate_gbm_paths(
        spec.s0,
        spec.drift,
        spec.volatility,
        spec.horizons[-1],
        spec.step,
        spec.count,
        spec.seed if seed is None else seed,
    )
    matrix = np.stack([p.prices for p in paths])
    medians: list[float] = []
    fees: list[float] = []
    for h in spec.horizons:
        idx = int(round(h / spec.step))
        ratio = matrix[:, idx] / spec.s0
        il = 0.5 * (2.0 * np.sqrt(ratio) - ratio - 1.0)
        medians.append(float(np.median(np.abs(il))))
        fees.append(spec.fee_rate * spec.volume_per_step * idx)
    fits = {
        "il": _power_fit(spec.horizons, medians),
        "fees": _power_fit(spec.horizons, fees),
    }
    return McResult(
        horizons=list(spec.horizons),
        median_abs_il=medians,
        fees=fees,
        fits=fits,
    )
