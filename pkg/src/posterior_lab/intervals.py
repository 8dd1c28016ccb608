"""Certified interval values.

``LogBracket`` carries [lower, upper] bounds on the log of a nonnegative
quantity (marginals, series with truncated tails); ``Bracket`` carries plain
linear bounds (posterior masses, probabilities).  Every combining operation
rounds outward by a fixed relative slack so float rounding cannot silently
invalidate an enclosure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import LOG_ZERO, log_add

# outward rounding per combine, in log space (~relative 1e-13)
COMBINE_SLACK = 1e-13


@dataclass(frozen=True)
class LogBracket:
    """Enclosure [lower, upper] of the log of a nonnegative real."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")

    @staticmethod
    def point(v: float) -> "LogBracket":
        return LogBracket(v, v)

    @staticmethod
    def zero() -> "LogBracket":
        return LogBracket(LOG_ZERO, LOG_ZERO)

    def is_zero(self) -> bool:
        return self.upper == LOG_ZERO

    def add(self, other: "LogBracket") -> "LogBracket":
        """Enclosure of the sum of the two underlying quantities."""
        lo = log_add(self.lower, other.lower)
        hi = log_add(self.upper, other.upper)
        return LogBracket(lo - COMBINE_SLACK if lo > LOG_ZERO else lo,
                          hi + COMBINE_SLACK if hi > LOG_ZERO else hi)

    def shift(self, c: float) -> "LogBracket":
        """Multiply the underlying quantity by e^c (exact in log space)."""
        if self.is_zero() and self.lower == LOG_ZERO:
            return LogBracket(LOG_ZERO, LOG_ZERO if self.upper == LOG_ZERO
                              else self.upper + c)
        return LogBracket(self.lower + c if self.lower > LOG_ZERO else LOG_ZERO,
                          self.upper + c if self.upper > LOG_ZERO else LOG_ZERO)

    def width(self) -> float:
        if self.upper == LOG_ZERO:
            return 0.0
        return self.upper - self.lower

    def midpoint(self) -> float:
        if self.upper == LOG_ZERO:
            return LOG_ZERO
        if self.lower == LOG_ZERO:
            return self.upper
        return 0.5 * (self.lower + self.upper)

    def contains(self, log_v: float) -> bool:
        return self.lower <= log_v <= self.upper


def log_bracket_sum(brackets) -> LogBracket:
    """Sum of enclosures; one outward slack for the whole aggregation."""
    from .numerics import log_sum_exp

    bl = [b.lower for b in brackets]
    bh = [b.upper for b in brackets]
    if not bl:
        return LogBracket.zero()
    lo = log_sum_exp(bl)
    hi = log_sum_exp(bh)
    return LogBracket(lo - COMBINE_SLACK if lo > LOG_ZERO else lo,
                      hi + COMBINE_SLACK if hi > LOG_ZERO else hi)


@dataclass(frozen=True)
class Bracket:
    """Enclosure [lower, upper] of a real (used for masses in [0,1])."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"invalid bracket [{self.lower}, {self.upper}]")

    @staticmethod
    def point(v: float) -> "Bracket":
        return Bracket(v, v)

    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, v: float) -> bool:
        return self.lower <= v <= self.upper

    def clamp01(self) -> "Bracket":
        return Bracket(min(max(self.lower, 0.0), 1.0),
                       min(max(self.upper, 0.0), 1.0))

    def __add__(self, other: "Bracket") -> "Bracket":
        return Bracket(self.lower + other.lower, self.upper + other.upper)


def mass_ratio(num: LogBracket, rest: LogBracket) -> Bracket:
    """Enclosure of A/(A+B) given log enclosures of A and B.

    Endpoints are matched so that mass_ratio(A, B) and mass_ratio(B, A)
    sum to exactly 1 at opposite ends.
    """
    def ratio(log_a: float, log_b: float) -> float:
        if log_a == LOG_ZERO:
            return 0.0
        if log_b == LOG_ZERO:
            return 1.0
        # 1 / (1 + e^{log_b - log_a})
        return 1.0 / (1.0 + math.exp(log_b - log_a))

    lo = ratio(num.lower, rest.upper)
    hi = ratio(num.upper, rest.lower)
    return Bracket(min(lo, hi), max(lo, hi)).clamp01()
