"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2, data
problems (bad files, missing prices) exit 3, engine inconsistencies
(partial fills, unreconstructable observations) exit 4.
"""

from __future__ import annotations


class ClammError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ClammError):
    """A scenario / study configuration is malformed or self-contradictory."""


class DataFormatError(ClammError):
    """An input file violates its documented schema.

    Carries the offending row number (1-based, header = row 1) when known.
    """

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class MissingPriceError(ClammError):
    """No price within the configured gap of the requested time."""

    def __init__(self, token_id: str, when: float, gap: float | None = None):
        self.token_id = token_id
        self.when = when
        detail = f"no usable price for {token_id!r} near t={when:.0f}"
        if gap is not None:
            detail += f" (nearest is {gap:.0f}s away)"
        super().__init__(detail)


class PriceCoverageError(ClammError):
    """A price series does not span a required interval.

    ``gaps`` lists the uncovered (start, end) intervals.
    """

    def __init__(self, gaps: list[tuple[float, float]]):
        self.gaps = gaps
        spans = ", ".join(f"[{a:.0f}, {b:.0f}]" for a, b in gaps)
        super().__init__(f"price series leaves intervals uncovered: {spans}")


class PartialFillError(ClammError):
    """A swap exhausted all initialized liquidity before completing.

    ``result`` carries the portion that did execute so callers can
    inspect or unwind it.
    """

    def __init__(self, result):
        self.result = result
        super().__init__(
            f"liquidity exhausted after filling {result.amount_in:.6g} in / "
            f"{result.amount_out:.6g} out"
        )


class InconsistentObservationError(ClammError):
    """An observed adjustment is incompatible with any in-range pool state."""
