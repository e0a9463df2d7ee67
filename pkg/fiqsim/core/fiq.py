"""
Finite Information Quantities.

A Fiq is a number in the unit interval seen as a process: each binary digit
is either determined (0 or 1) or undetermined with an exact propensity. Only
finitely many positions are stored; every other position is an
undetermined tail bit of propensity 1/2, so the information content is a
finite sum.

Fiq objects are views onto a shared bit store. A suffix view sees the same
bits shifted, which is how the doubling map keeps its exact symbolic
dynamics: actualizing a bit of the successor actualizes the same bit of the
initial condition. `origin` maps view positions to absolute input
addresses for provenance.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import structlog

from ..exceptions import PositionError, ValidationError
from .actualization import ActualizationPolicy, as_policy
from .intervals import DyadicInterval
from .numbers import HALF, Propensity, RationalLike, as_fraction, bit_information
from .random_source import RandomSource

logger = structlog.get_logger(__name__)

Source = Union[ActualizationPolicy, RandomSource]


@dataclass(frozen=True)
class Determined:
    bit: int


@dataclass(frozen=True)
class Undetermined:
    propensity: Propensity


BitState = Union[Determined, Undetermined]

_TAIL = Undetermined(Propensity(HALF))


class _BitStore:
    """Positions are 1-based and absolute within the store"""

    __slots__ = ("determined", "propensities", "max_position")

    def __init__(self) -> None:
        self.determined: Dict[int, int] = {}
        self.propensities: Dict[int, Propensity] = {}
        self.max_position = 0

    def touch(self, position: int) -> None:
        if position > self.max_position:
            self.max_position = position


class Fiq:
    """A number-as-process with determined bits and rational propensities"""

    __slots__ = ("_store", "_offset", "origin")

    def __init__(self, store: Optional[_BitStore] = None, offset: int = 0,
                 origin: int = 0):
        self._store = store if store is not None else _BitStore()
        self._offset = offset
        self.origin = origin

    # -- construction -----------------------------------------------------

    @classmethod
    def from_bits(cls, bits: Union[str, Sequence[int]], origin: int = 0) -> "Fiq":
        """Determined prefix followed by the 1/2 tail"""
        fiq = cls(origin=origin)
        for n, raw in enumerate(bits, start=1):
            bit = int(raw)
            if bit not in (0, 1):
                raise ValidationError(f"bit {raw!r} at position {n} is not 0 or 1")
            fiq.record(n, bit)
        return fiq

    @classmethod
    def from_rational(cls, value: RationalLike, depth: Optional[int] = None) -> "Fiq":
        """
        Determined expansion of a rational in [0, 1). Dyadic rationals are
        exact; any other rational needs an explicit depth.
        """
        q = as_fraction(value)
        if not 0 <= q < 1:
            raise ValidationError(f"{q} outside [0, 1)")
        denominator = q.denominator
        dyadic = denominator & (denominator - 1) == 0
        if depth is None:
            if not dyadic:
                raise ValidationError(
                    f"{q} has an infinite binary expansion; pass a depth"
                )
            depth = max(1, denominator.bit_length() - 1)
        if depth < 1:
            raise ValidationError(f"depth must be >= 1, got {depth}")
        bits = []
        remainder = q
        for _ in range(depth):
            remainder *= 2
            digit = 1 if remainder >= 1 else 0
            remainder -= digit
            bits.append(digit)
        return cls.from_bits(bits)

    # -- inspection -------------------------------------------------------

    @property
    def explicit_len(self) -> int:
        return max(0, self._store.max_position - self._offset)

    def address(self, n: int) -> int:
        """Absolute input address of view position n"""
        return self.origin + n

    def _check(self, n: int) -> int:
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise PositionError(n, "positions are integers >= 1")
        return n + self._offset

    def state(self, n: int) -> BitState:
        key = self._check(n)
        bit = self._store.determined.get(key)
        if bit is not None:
            return Determined(bit)
        propensity = self._store.propensities.get(key)
        if propensity is not None:
            return Undetermined(propensity)
        return _TAIL

    def is_determined(self, n: int) -> bool:
        return self._check(n) in self._store.determined

    def propensity(self, n: int) -> Propensity:
        state = self.state(n)
        if isinstance(state, Determined):
            raise PositionError(n, "already determined")
        return state.propensity

    def states(self) -> Iterator[Tuple[int, BitState]]:
        """Explicit positions 1 .. explicit_len with their states"""
        for n in range(1, self.explicit_len + 1):
            yield n, self.state(n)

    def determined_bits(self) -> Dict[int, int]:
        return {
            n: state.bit for n, state in self.states() if isinstance(state, Determined)
        }

    def lowest_undetermined(self) -> int:
        determined = self._store.determined
        n = 1
        while n + self._offset in determined:
            n += 1
        return n

    def determined_prefix_length(self) -> int:
        """Number of leading positions that are all determined"""
        return self.lowest_undetermined() - 1

    # -- mutation ---------------------------------------------------------

    def record(self, n: int, bit: int) -> None:
        """Fix position n to bit; a determined bit never changes"""
        key = self._check(n)
        if bit not in (0, 1):
            raise ValidationError(f"bit {bit!r} is not 0 or 1")
        if key in self._store.determined:
            raise PositionError(n, "already determined")
        self._store.propensities.pop(key, None)
        self._store.determined[key] = bit
        self._store.touch(key)

    def set_propensity(self, n: int, propensity: RationalLike) -> None:
        key = self._check(n)
        if key in self._store.determined:
            raise PositionError(n, "already determined")
        self._store.propensities[key] = Propensity.of(propensity)
        self._store.touch(key)

    def actualize(self, n: int, source: Source) -> int:
        """Draw the value of undetermined position n and fix it"""
        propensity = self.propensity(n)
        bit = as_policy(source).draw(self.address(n), propensity)
        self.record(n, bit)
        return bit

    # -- views and copies -------------------------------------------------

    def suffix(self, k: int) -> "Fiq":
        """View of positions k+1, k+2, ... sharing this store"""
        if k < 0:
            raise ValidationError(f"suffix shift must be >= 0, got {k}")
        return Fiq(self._store, self._offset + k, self.origin + k)

    def copy(self, origin: Optional[int] = None) -> "Fiq":
        clone = Fiq(origin=self.origin if origin is None else origin)
        for n, state in self.states():
            if isinstance(state, Determined):
                clone.record(n, state.bit)
            else:
                clone.set_propensity(n, state.propensity)
        return clone

    def prepend(self, bit: int) -> "Fiq":
        """New Fiq whose first bit is `bit` followed by this expansion"""
        shifted = Fiq(origin=self.origin)
        shifted.record(1, bit)
        for n, state in self.states():
            if isinstance(state, Determined):
                shifted.record(n + 1, state.bit)
            else:
                shifted.set_propensity(n + 1, state.propensity)
        return shifted

    # -- dunder -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Fiq):
            return NotImplemented
        return self._signature() == other._signature()

    def _signature(self) -> Tuple[Tuple[int, BitState], ...]:
        return tuple(
            (n, state) for n, state in self.states()
            if not (isinstance(state, Undetermined) and state.propensity.value == HALF)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        from .literal import format_fiq

        return f"Fiq({format_fiq(self)!r}, origin={self.origin})"


def make_fiq(determined: Iterable[Tuple[int, int]] = (),
             propensities: Iterable[Tuple[int, RationalLike]] = ()) -> Fiq:
    """Fiq with exactly the given determined bits and propensities"""
    fiq = Fiq()
    seen = set()
    for n, bit in determined:
        if n in seen:
            raise PositionError(n, "duplicate position")
        seen.add(n)
        fiq.record(n, bit)
    for n, q in propensities:
        if n in seen:
            raise PositionError(n, "duplicate position")
        seen.add(n)
        fiq.set_propensity(n, q)
    return fiq


def information_content(x: Fiq) -> float:
    """Sum of bit information over explicit positions; tail bits add 0"""
    terms = []
    for _, state in x.states():
        if isinstance(state, Determined):
            terms.append(1.0)
        else:
            terms.append(bit_information(state.propensity))
    return math.fsum(terms)


def actualize_bit(x: Fiq, n: int, rng: Source) -> Tuple[Fiq, int]:
    bit = x.actualize(n, rng)
    logger.debug("bit_actualized", position=n, address=x.address(n), bit=bit)
    return x, bit


def possible_interval(x: Fiq, depth: int) -> DyadicInterval:
    """
    Hull of all values obtainable by assigning the undetermined positions up
    to depth and extending arbitrarily beyond it. Half-open: an expansion
    ending in all ones is identified with its finite successor, so "101*" at
    depth 3 gives [5/8, 3/4). Reports print the closure, [5/8, 3/4].
    """
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    low = Fraction(0)
    free = Fraction(0)
    for n in range(1, depth + 1):
        weight = Fraction(1, 1 << n)
        state = x.state(n)
        if isinstance(state, Determined):
            if state.bit:
                low += weight
        else:
            free += weight
    high = low + free + Fraction(1, 1 << depth)
    return DyadicInterval(low, high, True, False)


def state_interval(x: Fiq) -> DyadicInterval:
    """possible_interval at the depth of the last explicit position"""
    return possible_interval(x, max(1, x.explicit_len))


def sample_value(x: Fiq, n_bits: int, rng: Source) -> Fraction:
    """Actualize every undetermined position up to n_bits; return the dyadic"""
    if n_bits < 1:
        raise ValidationError(f"n_bits must be >= 1, got {n_bits}")
    policy = as_policy(rng)
    value = Fraction(0)
    for n in range(1, n_bits + 1):
        state = x.state(n)
        bit = x.actualize(n, policy) if isinstance(state, Undetermined) else state.bit
        if bit:
            value += Fraction(1, 1 << n)
    return value
