"""
Tests for the randomness battery and the two-sample equivalence test.
"""

import numpy as np
import pytest

from fiqsim.core import BitBlockStream, Fiq, RandomSource
from fiqsim.dynamics import MapSpec, evolve
from fiqsim.exceptions import DegenerateStatisticError, StreamTooShortError, ValidationError
from fiqsim.stats import (
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
from fiqsim.supplement import BitTape, evolve_supplemented

ALTERNATING = DigitStream.from_string("01" * 500)
ALL_ONES = DigitStream(np.ones(1000, dtype=np.uint8))


def champernowne(n: int) -> DigitStream:
    """0 1 10 11 100 ... concatenated, first n bits"""
    text = ""
    i = 0
    while len(text) < n:
        text += format(i, "b")
        i += 1
    return DigitStream.from_string(text[:n])


def fair(seed: int, n: int) -> DigitStream:
    return DigitStream(BitBlockStream(seed).bits(0, n), seed=seed)


def biased(seed: int, n: int, p: float) -> DigitStream:
    bits = (np.random.default_rng(seed).random(n) < p).astype(np.uint8)
    return DigitStream(bits, seed=seed)


# ============================================================
# DigitStream and TestReport
# ============================================================

def test_digit_stream_validation():
    with pytest.raises(ValidationError):
        DigitStream(np.array([], dtype=np.uint8))
    with pytest.raises(ValidationError):
        DigitStream([0, 1, 2])
    with pytest.raises(ValidationError):
        DigitStream.from_string("0102")
    stream = DigitStream.from_string("0110", model="fiq", map="doubling", seed=4)
    assert len(stream) == 4
    assert stream.label == {"model": "fiq", "map": "doubling", "seed": 4}
    with pytest.raises(ValueError):
        stream.bits[0] = 1


def test_report_p_value_range():
    with pytest.raises(ValidationError):
        TestReport(test="x", statistic=0.0, p_value=1.5, alpha=0.001, sample_size=1)
    report = TestReport(test="x", statistic=0.0, p_value=0.5, alpha=0.001, sample_size=1)
    assert report.verdict == "pass"
    assert report.summary_row() == {
        "test": "x", "k": "", "statistic": "0.0", "p_value": "0.5", "verdict": "pass",
    }


# ============================================================
# Monobit, block frequency, serial, runs
# ============================================================

def test_monobit_balanced_and_maximal():
    assert monobit_test(ALTERNATING).p_value == 1.0
    assert monobit_test(ALTERNATING).parameters["ones"] == 500
    report = monobit_test(ALL_ONES)
    assert report.p_value < 1e-100
    assert report.verdict == "reject"


def test_monobit_needs_100_bits():
    with pytest.raises(StreamTooShortError):
        monobit_test(DigitStream.from_string("01" * 49 + "0"))


def test_monobit_p_values_are_uniform_under_the_null():
    p_values = [monobit_test(fair(seed, 100_000)).p_value for seed in range(1000)]
    assert not ks_uniformity(p_values).rejected


def test_block_frequency_k1_matches_monobit():
    stream = fair(3, 4096)
    assert block_frequency_test(stream, 1).p_value == pytest.approx(
        monobit_test(stream).p_value, rel=1e-9
    )


def test_block_frequency_rejects_period_two():
    report = block_frequency_test(ALTERNATING, 2)
    assert report.p_value < 1e-6
    assert report.block_length == 2
    assert report.parameters["dof"] == 3


def test_block_frequency_limits():
    with pytest.raises(StreamTooShortError):
        block_frequency_test(DigitStream.from_string("01" * 100), 4)
    with pytest.raises(ValidationError):
        block_frequency_test(fair(1, 100_000), 9)


def test_doubling_trajectory_passes_block_frequency():
    trajectory = evolve(MapSpec.parse("doubling"), Fiq(), 10_000, 1, RandomSource(12))
    stream = DigitStream(trajectory.emitted_bits(), model="fiq", map="doubling", seed=12)
    for k in (2, 3, 4):
        assert not block_frequency_test(stream, k).rejected


def test_serial_correlation():
    stream = fair(5, 100_000)
    report = serial_correlation(stream, 1)
    assert abs(report.statistic) <= 4 / np.sqrt(100_000)
    anti = serial_correlation(ALTERNATING, 1)
    assert anti.statistic == pytest.approx(-1.0)
    assert anti.p_value < 1e-6
    with pytest.raises(DegenerateStatisticError):
        serial_correlation(ALL_ONES, 1)
    with pytest.raises(StreamTooShortError):
        serial_correlation(DigitStream.from_string("0110" * 5), 2)


def test_runs():
    assert runs_test(ALTERNATING).p_value < 1e-6
    assert runs_test(ALTERNATING).statistic == 1000
    assert not runs_test(fair(8, 10_000)).rejected
    # frequency prerequisite fails outright
    assert runs_test(ALL_ONES).p_value == 0.0


# ============================================================
# Borel normality
# ============================================================

def test_champernowne_prefix_deviation():
    report = borel_normality(champernowne(10_000), 1)
    assert report.parameters["deviations"][0] == pytest.approx(0.04)
    assert report.bound == pytest.approx(0.036452, abs=1e-6)
    # 5400 ones in 10^4 bits sits just outside the bound
    assert report.rejected


def test_all_zeros_fails_at_every_k():
    stream = DigitStream(np.zeros(320, dtype=np.uint8))
    report = borel_normality(stream, 4)
    np.testing.assert_allclose(report.parameters["deviations"], [1 / 2, 3 / 4, 7 / 8, 15 / 16])
    assert report.statistic == pytest.approx(15 / 16)
    assert report.verdict == "reject"


def test_tape_trajectory_is_normal():
    trajectory = evolve_supplemented(MapSpec.parse("doubling"), BitTape(17), 10_000, 1)
    report = borel_normality(DigitStream(trajectory.emitted_bits()), 4)
    assert not report.rejected
    assert len(report.parameters["serial_p_values"]) == 4


def test_borel_normality_limits():
    with pytest.raises(StreamTooShortError):
        borel_normality(DigitStream(np.zeros(319, dtype=np.uint8)), 4)
    with pytest.raises(ValidationError):
        borel_normality(fair(1, 10_000), 17)


# ============================================================
# Two-sample equivalence
# ============================================================

def test_identical_ensembles_are_indistinguishable():
    ensemble = [fair(seed, 1000) for seed in range(20)]
    report = two_sample_equivalence(ensemble, list(ensemble), 2)
    assert report.statistic == pytest.approx(0.0, abs=1e-9)
    assert report.verdict == "indistinguishable at α=0.001"


def test_resplits_reject_at_about_the_alpha_rate():
    streams = [fair(seed, 1000) for seed in range(40)]
    splitter = np.random.default_rng(0)
    rejections = 0
    for _ in range(100):
        order = splitter.permutation(len(streams))
        a = [streams[i] for i in order[:20]]
        b = [streams[i] for i in order[20:]]
        rejections += two_sample_equivalence(a, b, 2).rejected
    assert rejections <= 2


def test_biased_ensemble_is_distinguished():
    a = [fair(seed, 10_000) for seed in range(5)]
    b = [biased(seed, 10_000, 0.6) for seed in range(5)]
    report = two_sample_equivalence(a, b, 1)
    assert report.verdict == "distinguished"
    assert report.p_value < 1e-6


def test_equivalence_is_symmetric():
    a = [fair(seed, 1000) for seed in range(10)]
    b = [fair(seed, 1000) for seed in range(10, 20)]
    forward = two_sample_equivalence(a, b, 3)
    backward = two_sample_equivalence(b, a, 3)
    assert forward.statistic == pytest.approx(backward.statistic, rel=1e-12)
    assert forward.parameters["dof"] == 7


def test_equivalence_errors():
    zeros = [DigitStream(np.zeros(100, dtype=np.uint8))]
    with pytest.raises(DegenerateStatisticError):
        two_sample_equivalence(zeros, zeros, 1)
    with pytest.raises(ValidationError):
        two_sample_equivalence([], zeros, 1)
    with pytest.raises(ValidationError):
        two_sample_equivalence([fair(1, 100)], [fair(2, 200)], 1)


@pytest.mark.slow
def test_fiq_and_tape_ensembles_are_indistinguishable():
    """Five disjoint blocks of 200 seeds per model; at most one rejection per block length"""
    doubling = MapSpec.parse("doubling")
    rejections = {k: 0 for k in (1, 2, 3, 4)}
    for block in range(5):
        seeds = range(200 * block, 200 * (block + 1))
        a = [
            DigitStream(evolve(doubling, Fiq(), 1000, 1, RandomSource(s)).emitted_bits())
            for s in seeds
        ]
        b = [
            DigitStream(evolve_supplemented(doubling, BitTape(10_000 + s), 1000, 1).emitted_bits())
            for s in seeds
        ]
        for k in rejections:
            rejections[k] += two_sample_equivalence(a, b, k).rejected
    assert max(rejections.values()) <= 1, rejections


# ============================================================
# Battery helpers
# ============================================================

def test_run_battery_covers_every_test():
    reports = run_battery(fair(2, 20_000), block_lengths=(1, 2), lag=1, max_k=3)
    assert [r.test for r in reports] == [
        "monobit", "block_frequency", "block_frequency", "serial_correlation", "runs",
        "borel_normality",
    ]


def test_binomial_frequency():
    assert binomial_frequency_test(500, 1000, 0.5).p_value == 1.0
    assert not binomial_frequency_test(1000, 1000, 1.0).rejected
    assert binomial_frequency_test(999, 1000, 1.0).rejected
    with pytest.raises(ValidationError):
        binomial_frequency_test(1, 0, 0.5)


def test_ks_uniformity_detects_skew():
    assert ks_uniformity(np.linspace(0, 0.1, 500)).rejected
    with pytest.raises(ValidationError):
        ks_uniformity([])
