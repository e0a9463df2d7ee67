"""
Exact intervals over the rationals.

Endpoints carry their own open/closed flags: the value set of a partially
determined expansion is half-open, and monotone maps move the flags with
the endpoints.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from ..exceptions import ValidationError


def _is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


@dataclass(frozen=True)
class Interval:
    """Rational interval with per-endpoint closedness"""

    low: Fraction
    high: Fraction
    low_closed: bool = True
    high_closed: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "low", Fraction(self.low))
        object.__setattr__(self, "high", Fraction(self.high))
        if self.low > self.high:
            raise ValidationError(f"interval low {self.low} exceeds high {self.high}")

    @classmethod
    def closed(cls, low: Fraction, high: Fraction) -> "Interval":
        return cls(low, high, True, True)

    @property
    def width(self) -> Fraction:
        return self.high - self.low

    @property
    def is_empty(self) -> bool:
        return self.low == self.high and not (self.low_closed and self.high_closed)

    def contains(self, value: Fraction) -> bool:
        above = value > self.low or (self.low_closed and value == self.low)
        below = value < self.high or (self.high_closed and value == self.high)
        return above and below

    def is_subset(self, other: "Interval") -> bool:
        if self.is_empty:
            return True
        low_ok = self.low > other.low or (
            self.low == other.low and (other.low_closed or not self.low_closed)
        )
        high_ok = self.high < other.high or (
            self.high == other.high and (other.high_closed or not self.high_closed)
        )
        return low_ok and high_ok

    def intersection(self, other: "Interval") -> Optional["Interval"]:
        if self.low > other.low:
            low, low_closed = self.low, self.low_closed
        elif other.low > self.low:
            low, low_closed = other.low, other.low_closed
        else:
            low, low_closed = self.low, self.low_closed and other.low_closed

        if self.high < other.high:
            high, high_closed = self.high, self.high_closed
        elif other.high < self.high:
            high, high_closed = other.high, other.high_closed
        else:
            high, high_closed = self.high, self.high_closed and other.high_closed

        if low > high or (low == high and not (low_closed and high_closed)):
            return None
        return Interval(low, high, low_closed, high_closed)

    def hull(self, other: "Interval") -> "Interval":
        if self.low < other.low:
            low, low_closed = self.low, self.low_closed
        elif other.low < self.low:
            low, low_closed = other.low, other.low_closed
        else:
            low, low_closed = self.low, self.low_closed or other.low_closed

        if self.high > other.high:
            high, high_closed = self.high, self.high_closed
        elif other.high > self.high:
            high, high_closed = other.high, other.high_closed
        else:
            high, high_closed = self.high, self.high_closed or other.high_closed
        return Interval(low, high, low_closed, high_closed)

    def map_monotone(self, f: Callable[[Fraction], Fraction],
                     increasing: bool) -> "Interval":
        """Image under a monotone function evaluated exactly at the endpoints"""
        if increasing:
            return Interval(f(self.low), f(self.high), self.low_closed, self.high_closed)
        return Interval(f(self.high), f(self.low), self.high_closed, self.low_closed)

    def closure(self) -> "Interval":
        return Interval.closed(self.low, self.high)

    def leading_bits(self, m: int) -> Optional[str]:
        """
        The m leading binary digits shared by every value in the interval,
        or None when the interval straddles an m-bit dyadic boundary.
        """
        scale = 1 << m
        top = scale - 1
        lo = min(math.floor(self.low * scale), top)
        if self.high_closed:
            hi = min(math.floor(self.high * scale), top)
        else:
            hi = min(math.ceil(self.high * scale) - 1, top)
        if lo != hi:
            return None
        return format(lo, f"0{m}b")

    def __str__(self) -> str:
        left = "[" if self.low_closed else "("
        right = "]" if self.high_closed else ")"
        return f"{left}{self.low}, {self.high}{right}"


@dataclass(frozen=True)
class DyadicInterval(Interval):
    """Interval whose endpoints are dyadic rationals"""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not (_is_dyadic(self.low) and _is_dyadic(self.high)):
            raise ValidationError(f"endpoints of {self} are not dyadic")
