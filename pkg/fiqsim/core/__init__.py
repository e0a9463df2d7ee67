"""Finite-information quantities and their actualization."""

from .actualization import ActualizationPolicy, CorrelatedPolicy, IndependentPolicy, as_policy
from .fiq import (
    Determined,
    Fiq,
    Undetermined,
    actualize_bit,
    information_content,
    make_fiq,
    possible_interval,
    sample_value,
    state_interval,
)
from .intervals import DyadicInterval, Interval
from .literal import format_fiq, parse_fiq
from .numbers import HALF, Propensity, as_fraction, bit_information, leading_bits
from .random_source import BitBlockStream, RandomSource, validate_seed

__all__ = [
    "ActualizationPolicy",
    "BitBlockStream",
    "CorrelatedPolicy",
    "Determined",
    "DyadicInterval",
    "Fiq",
    "HALF",
    "IndependentPolicy",
    "Interval",
    "Propensity",
    "RandomSource",
    "Undetermined",
    "actualize_bit",
    "as_fraction",
    "as_policy",
    "bit_information",
    "format_fiq",
    "information_content",
    "leading_bits",
    "make_fiq",
    "parse_fiq",
    "possible_interval",
    "sample_value",
    "state_interval",
    "validate_seed",
]
