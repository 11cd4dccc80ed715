"""Price path carriers and the geometric Brownian motion generator."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, PriceCoverageError


@dataclass
class PricePath:
    """A strictly time-ordered series of positive prices."""

    times: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.prices = np.asarray(self.prices, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.prices.shape:
            raise ValueError("times and prices must be 1-d arrays of equal length")
        if len(self.times) == 0:
            raise ValueError("a price path needs at least one point")
        if not np.all(np.diff(self.times) > 0):
            raise ValueError("timestamps must be strictly increasing")
        if not np.all(self.prices > 0):
            raise ValueError("prices must be positive")

    def __len__(self):
        return len(self.times)

    @property
    def start_time(self) -> float:
        return float(self.times[0])

    @property
    def end_time(self) -> float:
        return float(self.times[-1])

    def nearest_index(self, t: float) -> int:
        """Index of the sample closest to ``t``; ties break earlier."""
        i = int(np.searchsorted(self.times, t))
        if i <= 0:
            return 0
        if i >= len(self.times):
            return len(self.times) - 1
        before = t - self.times[i - 1]
        after = self.times[i] - t
        return i - 1 if before <= after else i

    def at(self, t: float) -> float:
        return float(self.prices[self.nearest_index(t)])

    def require_coverage(self, t0: float, t1: float, slack: float = 0.0) -> None:
        gaps = []
        if t0 < self.start_time - slack:
            gaps.append((t0, min(t1, self.start_time)))
        if t1 > self.end_time + slack:
            gaps.append((max(t0, self.end_time), t1))
        if gaps:
            raise PriceCoverageError(gaps)

    def between(self, t0: float, t1: float) -> list[tuple[float, float]]:
        """Samples with t0 < time < t1, as (time, price) pairs."""
        lo = int(np.searchsorted(self.times, t0, side="right"))
        hi = int(np.searchsorted(self.times, t1, side="left"))
        return [(float(self.times[i]), float(self.prices[i])) for i in range(lo, hi)]


def load_price_path(path: str) -> PricePath:
    """Read a two-column ``timestamp,price`` CSV into a PricePath."""
    times, prices = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["timestamp", "price"]:
            raise DataFormatError("expected header 'timestamp,price'", row=1)
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                times.append(float(row[0]))
                prices.append(float(row[1]))
            except (ValueError, IndexError) as exc:
                raise DataFormatError(f"bad path row {row!r}: {exc}", row=i) from None
    if not times:
        raise DataFormatError("price path file has no data rows")
    return PricePath(np.array(times), np.array(prices))


def generate_gbm_paths(
    s0: float,
    drift: float,
    volatility: float,
    horizon: float,
    step: float,
    count: int,
    seed: int,
    t0: float = 0.0,
) -> list[PricePath]:
    """Simulate ``count`` geometric Brownian motion paths.

    Log-increments are i.i.d. normal with mean (drift - volatility^2/2) * step
    and standard deviation volatility * sqrt(step); ``drift`` is the
    instantaneous (SDE) drift, so drift = 0 makes the price a martingale.
    Deterministic for a given seed.
    """
    if not s0 > 0:
        raise ValueError(f"s0 must be positive, got {s0!r}")
    if volatility < 0:
        raise ValueError(f"volatility must be nonnegative, got {volatility!r}")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step!r}")
    if not horizon >= step:
        raise ValueError(f"horizon {horizon!r} shorter than one step {step!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count!r}")
    n_steps = int(round(horizon / step))
    if not math.isclose(n_steps * step, horizon, rel_tol=1e-9):
        raise ValueError(f"horizon {horizon!r} is not a whole number of steps {step!r}")
    rng = np.random.default_rng(seed)
    increments = rng.normal(
        (drift - 0.5 * volatility**2) * step,
        volatility * math.sqrt(step),
        size=(count, n_steps),
    )
    log_prices = np.concatenate(
        [np.zeros((count, 1)), np.cumsum(increments, axis=1)], axis=1
    )
    prices = s0 * np.exp(log_prices)
    times = t0 + step * np.arange(n_steps + 1)
    return [PricePath(times.copy(), prices[i]) for i in range(count)]
