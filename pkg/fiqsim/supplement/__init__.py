"""Deterministic hidden-variable supplementations."""

from .quantum import (
    BinaryMeasurement,
    ExplicitDigits,
    HiddenVar,
    QState,
    as_probability,
    born_probability,
    measure_binary,
    run_measurement_sequence,
    split_bits,
)
from .tape import BitTape, TapePolicy, evolve_supplemented, tape_bit

__all__ = [
    "BinaryMeasurement",
    "BitTape",
    "ExplicitDigits",
    "HiddenVar",
    "QState",
    "TapePolicy",
    "as_probability",
    "born_probability",
    "evolve_supplemented",
    "measure_binary",
    "run_measurement_sequence",
    "split_bits",
    "tape_bit",
]
