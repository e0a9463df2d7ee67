"""Randomness and equivalence testing of emitted digit streams."""

from .battery import (
    DEFAULT_ALPHA,
    DigitStream,
    TestReport,
    binomial_frequency_test,
    block_frequency_test,
    borel_normality,
    ks_uniformity,
    monobit_test,
    run_battery,
    runs_test,
    serial_correlation,
    two_sample_equivalence,
)

__all__ = [
    "DEFAULT_ALPHA",
    "DigitStream",
    "TestReport",
    "binomial_frequency_test",
    "block_frequency_test",
    "borel_normality",
    "ks_uniformity",
    "monobit_test",
    "run_battery",
    "runs_test",
    "serial_correlation",
    "two_sample_equivalence",
]
