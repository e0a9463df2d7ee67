"""
Hidden-variable completion of binary quantum measurements.

A uniform hidden variable r is split into its odd-position bits r1 and
even-position bits r2. The outcome is +1 iff r1 <= <psi|P|psi>, and r is
replaced by r2 for the next measurement. The state psi is never updated.
"""

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
import structlog

from ..exceptions import ComparisonUndecidedError, PositionError, ValidationError
from .tape import BitTape

logger = structlog.get_logger(__name__)

NORM_TOLERANCE = 1e-12
PROJECTOR_TOLERANCE = 1e-10
IMAGINARY_TOLERANCE = 1e-10
DEFAULT_COMPARISON_LIMIT = 256


@dataclass(frozen=True, eq=False)
class QState:
    """Normalized state vector"""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        vector = np.array(self.amplitudes, dtype=complex).ravel()
        if vector.size < 2:
            raise ValidationError(f"state dimension must be >= 2, got {vector.size}")
        norm = float(np.vdot(vector, vector).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValidationError(f"state is not normalized: sum |a|^2 = {norm!r}")
        vector.setflags(write=False)
        object.__setattr__(self, "amplitudes", vector)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "QState":
        """From a list of [re, im] entries"""
        return cls(_pairs_to_complex(pairs, ndim=1, what="state"))

    @property
    def dimension(self) -> int:
        return int(self.amplitudes.size)


@dataclass(frozen=True, eq=False)
class BinaryMeasurement:
    """Orthogonal projector P with P = P^dagger and P^2 = P"""

    projector: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.array(self.projector, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError(f"projector must be square, got shape {matrix.shape}")
        if matrix.shape[0] < 2:
            raise ValidationError("projector dimension must be >= 2")
        if np.max(np.abs(matrix - matrix.conj().T)) > PROJECTOR_TOLERANCE:
            raise ValidationError("projector is not Hermitian (P != P^dagger)")
        if np.max(np.abs(matrix @ matrix - matrix)) > PROJECTOR_TOLERANCE:
            raise ValidationError("projector is not idempotent (P^2 != P)")
        matrix.setflags(write=False)
        object.__setattr__(self, "projector", matrix)

    @classmethod
    def from_pairs(cls, rows: Sequence[Sequence[Sequence[float]]]) -> "BinaryMeasurement":
        """From a matrix of [re, im] entries"""
        return cls(_pairs_to_complex(rows, ndim=2, what="projector"))

    @property
    def dimension(self) -> int:
        return int(self.projector.shape[0])


def _pairs_to_complex(data, ndim: int, what: str) -> np.ndarray:
    array = np.asarray(data, dtype=float)
    if array.ndim != ndim + 1 or array.shape[-1] != 2:
        raise ValidationError(f"{what} entries must be [re, im] pairs")
    return array[..., 0] + 1j * array[..., 1]


def born_probability(psi: QState, meas: BinaryMeasurement) -> float:
    """p = <psi|P|psi>, checked to be real and clamped to [0, 1]"""
    if psi.dimension != meas.dimension:
        raise ValidationError(
            f"dimension mismatch: state {psi.dimension}, projector {meas.dimension}"
        )
    value = np.vdot(psi.amplitudes, meas.projector @ psi.amplitudes)
    if abs(value.imag) > IMAGINARY_TOLERANCE:
        raise ValidationError(f"<psi|P|psi> has imaginary part {value.imag!r}")
    p = float(value.real)
    if p < -IMAGINARY_TOLERANCE or p > 1 + IMAGINARY_TOLERANCE:
        raise ValidationError(f"<psi|P|psi> = {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def as_probability(p: Union[Fraction, int, str, float]) -> Fraction:
    """Exact probability; floats convert to their exact binary value"""
    if isinstance(p, bool):
        raise ValidationError("probability must be numeric, got bool")
    if isinstance(p, str):
        try:
            value = Fraction(p.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValidationError(f"probability {p!r} is not a rational") from e
    elif isinstance(p, (Fraction, int)):
        value = Fraction(p)
    elif isinstance(p, (Real, np.floating)):
        if not np.isfinite(float(p)):
            raise ValidationError(f"probability {p!r} is not finite")
        value = Fraction(float(p))
    else:
        raise ValidationError(f"probability must be numeric, got {type(p).__name__}")
    if not 0 <= value <= 1:
        raise ValidationError(f"probability {value} outside [0, 1]")
    return value


class DigitSource(Protocol):
    def bit(self, n: int) -> int:
        ...


class ExplicitDigits:
    """Fixed digits, optionally repeated periodically, then a constant tail"""

    def __init__(self, bits: str, repeat: bool = False, tail: int = 0):
        if not bits or any(ch not in "01" for ch in bits):
            raise ValidationError(f"digits must be a non-empty 0/1 string, got {bits!r}")
        self.bits = bits
        self.repeat = repeat
        self.tail = tail

    def bit(self, n: int) -> int:
        if n < 1:
            raise PositionError(n, "digit positions start at 1")
        if n <= len(self.bits):
            return int(self.bits[n - 1])
        if self.repeat:
            return int(self.bits[(n - 1) % len(self.bits)])
        return self.tail


class HiddenVar:
    """
    Hidden variable r in [0, 1): bit k is source bit scale*k + offset.
    The materialized prefix only grows and never changes.
    """

    def __init__(self, source: DigitSource, scale: int = 1, offset: int = 0):
        self.source = source
        self.scale = scale
        self.offset = offset
        self._prefix: List[int] = []

    @classmethod
    def uniform(cls, seed: int, lane: int = 0) -> "HiddenVar":
        return cls(BitTape(seed, lane=lane))

    @classmethod
    def from_digits(cls, bits: str, repeat: bool = False) -> "HiddenVar":
        return cls(ExplicitDigits(bits, repeat=repeat))

    def bit(self, k: int) -> int:
        if k < 1:
            raise PositionError(k, "hidden-variable positions start at 1")
        while len(self._prefix) < k:
            n = len(self._prefix) + 1
            self._prefix.append(self.source.bit(self.scale * n + self.offset))
        return self._prefix[k - 1]

    @property
    def prefix(self) -> Tuple[int, ...]:
        return tuple(self._prefix)

    def value(self, depth: int) -> Fraction:
        """Dyadic value of the first depth bits"""
        total = 0
        for k in range(1, depth + 1):
            total = (total << 1) | self.bit(k)
        return Fraction(total, 1 << depth)

    def odd(self) -> "HiddenVar":
        """r1: bits at odd positions of r"""
        return HiddenVar(self.source, 2 * self.scale, self.offset - self.scale)

    def even(self) -> "HiddenVar":
        """r2: bits at even positions of r"""
        return HiddenVar(self.source, 2 * self.scale, self.offset)

    def __repr__(self) -> str:
        shown = "".join(str(b) for b in self._prefix)
        return f"HiddenVar(0.{shown}..., scale={self.scale}, offset={self.offset})"


def split_bits(r: HiddenVar, depth: int) -> Tuple[HiddenVar, HiddenVar]:
    if depth < 2 or depth % 2:
        raise ValidationError(f"split depth must be an even integer >= 2, got {depth}")
    r1, r2 = r.odd(), r.even()
    r1.bit(depth // 2)
    r2.bit(depth // 2)
    return r1, r2


def _at_most(r1: HiddenVar, p: Fraction, limit: int) -> bool:
    """r1 <= p, decided on the first differing binary digit"""
    if p >= 1:
        return True
    remainder = p
    for k in range(1, limit + 1):
        remainder *= 2
        digit = 1 if remainder >= 1 else 0
        remainder -= digit
        bit = r1.bit(k)
        if bit != digit:
            return bit < digit
    raise ComparisonUndecidedError(limit)


def measure_binary(p: Union[Fraction, int, str, float], r: HiddenVar,
                   limit: int = DEFAULT_COMPARISON_LIMIT) -> Tuple[int, HiddenVar]:
    """Outcome +1 iff r1 <= p; the hidden variable moves on to r2"""
    probability = as_probability(p)
    outcome = 1 if _at_most(r.odd(), probability, limit) else -1
    return outcome, r.even()


Measurable = Union[Fraction, int, str, float, Tuple[QState, BinaryMeasurement]]


def run_measurement_sequence(ps: Sequence[Measurable], r0: HiddenVar,
                             limit: int = DEFAULT_COMPARISON_LIMIT,
                             trial: Optional[int] = None) -> List[int]:
    outcomes: List[int] = []
    r = r0
    for step, item in enumerate(ps, start=1):
        if isinstance(item, tuple):
            psi, meas = item
            p: Union[Fraction, int, str, float] = born_probability(psi, meas)
        else:
            p = item
        try:
            outcome, r = measure_binary(p, r, limit)
        except ComparisonUndecidedError as e:
            logger.warning("comparison_undecided", trial=trial, step=step, limit=limit)
            raise e.located(trial=trial, step=step) from e
        outcomes.append(outcome)
    return outcomes
