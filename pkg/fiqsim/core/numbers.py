"""
Exact rationals, propensities and the per-bit information measure.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

import numpy as np
from scipy.special import entr

from ..exceptions import ValidationError

HALF = Fraction(1, 2)

RationalLike = Union[Fraction, int, str, "Propensity"]

_LN2 = float(np.log(2.0))


def as_fraction(value: RationalLike, *, what: str = "value") -> Fraction:
    """Coerce an exact rational input. Floats are rejected."""
    if isinstance(value, Propensity):
        return value.value
    if isinstance(value, bool):
        raise ValidationError(f"{what} must be an exact rational, got bool")
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValidationError(f"{what} is not a rational: {value!r}") from e
    raise ValidationError(
        f"{what} must be an exact rational (Fraction, int or 'p/q'), "
        f"got {type(value).__name__}"
    )


@dataclass(frozen=True)
class Propensity:
    """Probability that an undetermined bit settles at 1, stored exactly"""

    value: Fraction

    def __post_init__(self) -> None:
        exact = as_fraction(self.value, what="propensity")
        if not 0 <= exact <= 1:
            raise ValidationError(f"propensity {exact} outside [0, 1]")
        object.__setattr__(self, "value", exact)

    @classmethod
    def of(cls, value: RationalLike) -> "Propensity":
        if isinstance(value, Propensity):
            return value
        return cls(as_fraction(value, what="propensity"))

    @property
    def is_certain(self) -> bool:
        return self.value in (0, 1)

    def __str__(self) -> str:
        return f"{self.value.numerator}/{self.value.denominator}"


def bit_information(q: RationalLike) -> float:
    """Information carried by one bit with propensity q: 1 - h(q) in bits"""
    exact = Propensity.of(q).value
    if exact == HALF:
        return 0.0
    if exact in (0, 1):
        return 1.0
    p = float(exact)
    entropy = (float(entr(p)) + float(entr(1.0 - p))) / _LN2
    return 1.0 - entropy


def leading_bits(value: Fraction, m: int) -> str:
    """First m binary digits of a value in [0, 1]; 1 reads as 0.111..."""
    scale = 1 << m
    bucket = min(math.floor(value * scale), scale - 1)
    return format(max(bucket, 0), f"0{m}b")
