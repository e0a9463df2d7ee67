"""
Randomness and equivalence tests over finite digit streams.

All tests are pure functions of their input streams and return a
TestReport carrying the raw statistic and p-value, so verdicts can be
re-thresholded after the fact.
"""

import math
from dataclasses import asdict, dataclass, field
from itertools import chain
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import structlog
from numpy.lib.stride_tricks import sliding_window_view
from scipy import stats as sps
from scipy.special import erfc

from ..exceptions import DegenerateStatisticError, StreamTooShortError, ValidationError

logger = structlog.get_logger(__name__)

DEFAULT_ALPHA = 0.001
MAX_BLOCK_LENGTH = 8
MAX_NORMALITY_LENGTH = 16
EQUIVALENCE_TEST = "two_sample_equivalence"


@dataclass(frozen=True, eq=False)
class DigitStream:
    """Finite bit sequence with provenance"""

    bits: np.ndarray
    model: Optional[str] = None
    map: Optional[str] = None
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        array = np.array(self.bits, dtype=np.int64).ravel()
        if array.size == 0:
            raise ValidationError("digit stream is empty")
        if np.any((array != 0) & (array != 1)):
            raise ValidationError("digit stream contains values other than 0 and 1")
        frozen = array.astype(np.uint8)
        frozen.setflags(write=False)
        object.__setattr__(self, "bits", frozen)

    @classmethod
    def from_string(cls, text: str, **labels: Any) -> "DigitStream":
        if any(ch not in "01" for ch in text):
            raise ValidationError("digit strings may only contain 0 and 1")
        bits = np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")
        return cls(bits, **labels)

    def __len__(self) -> int:
        return int(self.bits.size)

    @property
    def label(self) -> Dict[str, Any]:
        return {"model": self.model, "map": self.map, "seed": self.seed}


@dataclass(frozen=True)
class TestReport:
    """Outcome of one statistical test"""

    __test__ = False

    test: str
    statistic: float
    p_value: float
    alpha: float
    sample_size: int
    parameters: Dict[str, Any] = field(default_factory=dict)
    block_length: Optional[int] = None
    bound: Optional[float] = None

    def __post_init__(self) -> None:
        p = float(self.p_value)
        if math.isnan(p) or p < -1e-12 or p > 1 + 1e-12:
            raise ValidationError(f"{self.test}: p-value {p!r} outside [0, 1]")
        object.__setattr__(self, "p_value", min(max(p, 0.0), 1.0))
        object.__setattr__(self, "statistic", float(self.statistic))

    @property
    def rejected(self) -> bool:
        if self.bound is not None:
            return self.statistic > self.bound
        return self.p_value < self.alpha

    @property
    def verdict(self) -> str:
        if self.test == EQUIVALENCE_TEST:
            return "distinguished" if self.rejected else f"indistinguishable at α={self.alpha:g}"
        return "reject" if self.rejected else "pass"

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["verdict"] = self.verdict
        return data

    def summary_row(self) -> Dict[str, str]:
        return {
            "test": self.test,
            "k": "" if self.block_length is None else str(self.block_length),
            "statistic": repr(self.statistic),
            "p_value": repr(self.p_value),
            "verdict": self.verdict,
        }


def _require(test: str, stream: DigitStream, required: int) -> int:
    n = len(stream)
    if n < required:
        raise StreamTooShortError(test, n, required)
    return n


def _weights(k: int) -> np.ndarray:
    return 1 << np.arange(k - 1, -1, -1, dtype=np.int64)


def _block_counts(bits: np.ndarray, k: int) -> np.ndarray:
    """Counts of non-overlapping k-blocks, indexed by block value"""
    blocks = bits[: (bits.size // k) * k].reshape(-1, k).astype(np.int64)
    return np.bincount(blocks @ _weights(k), minlength=1 << k)


def _overlapping_counts(bits: np.ndarray, k: int) -> np.ndarray:
    windows = sliding_window_view(bits.astype(np.int64), k)
    return np.bincount(windows @ _weights(k), minlength=1 << k)


def monobit_test(s: DigitStream, alpha: float = DEFAULT_ALPHA) -> TestReport:
    n = _require("monobit", s, 100)
    ones = int(np.count_nonzero(s.bits))
    z = (2 * ones - n) / math.sqrt(n)
    p_value = float(erfc(abs(z) / math.sqrt(2)))
    return TestReport(
        test="monobit",
        statistic=z,
        p_value=p_value,
        alpha=alpha,
        sample_size=n,
        parameters={"distribution": "normal", "ones": ones},
    )


def block_frequency_test(s: DigitStream, k: int, alpha: float = DEFAULT_ALPHA) -> TestReport:
    if not 1 <= k <= MAX_BLOCK_LENGTH:
        raise ValidationError(f"block length must be in 1..{MAX_BLOCK_LENGTH}, got {k}")
    n = _require("block_frequency", s, 20 * (1 << k))
    counts = _block_counts(s.bits, k)
    blocks = int(counts.sum())
    expected = blocks / (1 << k)
    statistic = float(((counts - expected) ** 2 / expected).sum())
    dof = (1 << k) - 1
    return TestReport(
        test="block_frequency",
        statistic=statistic,
        p_value=float(sps.chi2.sf(statistic, dof)),
        alpha=alpha,
        sample_size=n,
        parameters={"distribution": "chi2", "dof": dof, "blocks": blocks},
        block_length=k,
    )


def serial_correlation(s: DigitStream, lag: int, alpha: float = DEFAULT_ALPHA) -> TestReport:
    if lag < 1:
        raise ValidationError(f"lag must be >= 1, got {lag}")
    n = _require("serial_correlation", s, 10 * lag + 1)
    x = s.bits[:-lag].astype(float)
    y = s.bits[lag:].astype(float)
    if x.std() == 0 or y.std() == 0:
        raise DegenerateStatisticError(
            "serial_correlation", "zero variance, autocorrelation undefined"
        )
    r = float(np.corrcoef(x, y)[0, 1])
    z = r * math.sqrt(n - lag)
    return TestReport(
        test="serial_correlation",
        statistic=r,
        p_value=float(erfc(abs(z) / math.sqrt(2))),
        alpha=alpha,
        sample_size=n,
        parameters={"distribution": "normal", "lag": lag, "z": z},
    )


def _psi_squared(bits: np.ndarray, m: int) -> float:
    """Serial statistic over cyclically extended overlapping m-blocks"""
    if m == 0:
        return 0.0
    n = bits.size
    extended = np.concatenate([bits, bits[: m - 1]])
    counts = _overlapping_counts(extended, m).astype(float)
    return float((1 << m) / n * (counts ** 2).sum() - n)


def borel_normality(s: DigitStream, max_k: int, alpha: float = DEFAULT_ALPHA) -> TestReport:
    """
    Largest deviation of overlapping k-block frequencies from 2^-k, for
    k = 1..max_k, against the bound sqrt(log2(n) / n). The p-value is the
    Bonferroni-combined serial-test p-value over the same k.
    """
    if not 1 <= max_k <= MAX_NORMALITY_LENGTH:
        raise ValidationError(f"max_k must be in 1..{MAX_NORMALITY_LENGTH}, got {max_k}")
    n = _require("borel_normality", s, 20 * (1 << max_k))
    bound = math.sqrt(math.log2(n) / n)

    deviations: List[float] = []
    serial_p: List[float] = []
    previous_psi = 0.0
    for k in range(1, max_k + 1):
        counts = _overlapping_counts(s.bits, k)
        frequencies = counts / (n - k + 1)
        deviations.append(float(np.max(np.abs(frequencies - 2.0 ** -k))))
        psi = _psi_squared(s.bits, k)
        serial_p.append(float(sps.chi2.sf(psi - previous_psi, 1 << (k - 1))))
        previous_psi = psi

    return TestReport(
        test="borel_normality",
        statistic=max(deviations),
        p_value=min(1.0, max_k * min(serial_p)),
        alpha=alpha,
        sample_size=n,
        parameters={
            "deviations": deviations,
            "serial_p_values": serial_p,
            "bound_rule": "sqrt(log2(n)/n)",
        },
        block_length=max_k,
        bound=bound,
    )


def runs_test(s: DigitStream, alpha: float = DEFAULT_ALPHA) -> TestReport:
    """Number of runs of identical bits against its expectation given the ones ratio"""
    n = _require("runs", s, 100)
    pi = float(np.count_nonzero(s.bits)) / n
    runs = int(np.count_nonzero(np.diff(s.bits.astype(np.int64)))) + 1
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        # frequency prerequisite failed
        p_value = 0.0
    else:
        p_value = float(erfc(
            abs(runs - 2 * n * pi * (1 - pi)) / (2 * math.sqrt(2 * n) * pi * (1 - pi))
        ))
    return TestReport(
        test="runs",
        statistic=float(runs),
        p_value=p_value,
        alpha=alpha,
        sample_size=n,
        parameters={"distribution": "normal", "ones_ratio": pi},
    )


def two_sample_equivalence(a: Sequence[DigitStream], b: Sequence[DigitStream], k: int,
                           alpha: float = DEFAULT_ALPHA) -> TestReport:
    """
    Chi-squared homogeneity of pooled non-overlapping k-block counts,
    ensemble a against ensemble b.
    """
    if not a or not b:
        raise ValidationError("both ensembles must be non-empty")
    if not 1 <= k <= MAX_BLOCK_LENGTH:
        raise ValidationError(f"block length must be in 1..{MAX_BLOCK_LENGTH}, got {k}")
    lengths = {len(s) for s in chain(a, b)}
    if len(lengths) != 1:
        raise ValidationError(f"streams must share one length, got {sorted(lengths)}")
    length = lengths.pop()
    if length < k:
        raise StreamTooShortError(EQUIVALENCE_TEST, length, k)

    table = np.vstack([
        np.sum([_block_counts(s.bits, k) for s in a], axis=0),
        np.sum([_block_counts(s.bits, k) for s in b], axis=0),
    ])
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        raise DegenerateStatisticError(EQUIVALENCE_TEST, "all counts fall in one cell")
    statistic, p_value, dof, _ = sps.chi2_contingency(table, correction=False)
    return TestReport(
        test=EQUIVALENCE_TEST,
        statistic=float(statistic),
        p_value=float(p_value),
        alpha=alpha,
        sample_size=int(table.sum()),
        parameters={
            "distribution": "chi2",
            "dof": int(dof),
            "ensemble_sizes": [len(a), len(b)],
            "stream_length": length,
        },
        block_length=k,
    )


def ks_uniformity(p_values: Iterable[float], alpha: float = DEFAULT_ALPHA) -> TestReport:
    """Kolmogorov-Smirnov test of a p-value sample against U(0, 1)"""
    sample = np.asarray(list(p_values), dtype=float)
    if sample.size == 0:
        raise ValidationError("no p-values to test")
    result = sps.kstest(sample, "uniform")
    return TestReport(
        test="ks_uniformity",
        statistic=float(result.statistic),
        p_value=float(result.pvalue),
        alpha=alpha,
        sample_size=int(sample.size),
        parameters={"distribution": "uniform(0,1)"},
    )


def run_battery(s: DigitStream, block_lengths: Sequence[int] = (1, 2, 3, 4),
                lag: int = 1, max_k: int = 4, alpha: float = DEFAULT_ALPHA) -> List[TestReport]:
    """The per-stream battery: monobit, block frequency per k, serial, runs, normality"""
    reports = [monobit_test(s, alpha)]
    reports.extend(block_frequency_test(s, k, alpha) for k in block_lengths)
    reports.append(serial_correlation(s, lag, alpha))
    reports.append(runs_test(s, alpha))
    reports.append(borel_normality(s, max_k, alpha))
    logger.debug("battery_finished", stream=s.label, rejected=[r.test for r in reports if r.rejected])
    return reports


def binomial_frequency_test(successes: int, trials: int, p: float,
                            alpha: float = DEFAULT_ALPHA) -> TestReport:
    """Observed success count against Binomial(trials, p), normal approximation"""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if not 0 <= p <= 1:
        raise ValidationError(f"probability {p} outside [0, 1]")
    frequency = successes / trials
    if p in (0.0, 1.0):
        # certain outcomes: any deviation is an outright failure
        statistic = abs(frequency - p)
        p_value = 1.0 if statistic == 0 else 0.0
    else:
        statistic = (successes - trials * p) / math.sqrt(trials * p * (1 - p))
        p_value = float(erfc(abs(statistic) / math.sqrt(2)))
    return TestReport(
        test="binomial_frequency",
        statistic=statistic,
        p_value=p_value,
        alpha=alpha,
        sample_size=trials,
        parameters={"distribution": "binomial", "p": p, "frequency": frequency},
    )
