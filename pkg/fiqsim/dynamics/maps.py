"""
Map catalog: chaotic maps of the unit interval (and the baker map of the
unit square) plus rotation as the integrable control.

Every map is piecewise monotone with exactly representable breakpoints, so
it can be evaluated exactly on rationals and applied to intervals branch by
branch.
"""

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Tuple, Union

from ..core.intervals import Interval
from ..core.numbers import RationalLike, as_fraction
from ..exceptions import DomainError, ValidationError

ONE = Fraction(1)
HALF = Fraction(1, 2)
ZERO = Fraction(0)

ExactPoint = Union[Fraction, Tuple[Fraction, Fraction]]


class MapKind(str, Enum):
    DOUBLING = "doubling"
    TENT = "tent"
    LOGISTIC4 = "logistic4"
    BAKER = "baker"
    ROTATION = "rotation"


@dataclass(frozen=True)
class Branch:
    """Monotone piece of a map"""
    domain: Interval
    func: Callable[[Fraction], Fraction]
    increasing: bool


def _doubling_low(x: Fraction) -> Fraction:
    return 2 * x


def _doubling_high(x: Fraction) -> Fraction:
    return 2 * x - 1


def _tent_down(x: Fraction) -> Fraction:
    return 2 - 2 * x


def _logistic(x: Fraction) -> Fraction:
    return 4 * x * (1 - x)


_MAP_PATTERN = re.compile(r"^\s*([a-z0-9_]+)\s*(?:\(\s*([^)]*?)\s*\))?\s*$")

_ALIASES = {
    "doubling": MapKind.DOUBLING,
    "bernoulli": MapKind.DOUBLING,
    "tent": MapKind.TENT,
    "logistic": MapKind.LOGISTIC4,
    "logistic4": MapKind.LOGISTIC4,
    "baker": MapKind.BAKER,
    "baker2d": MapKind.BAKER,
    "rotation": MapKind.ROTATION,
}


@dataclass(frozen=True)
class MapSpec:
    """A dynamical map with exact and interval step semantics"""

    kind: MapKind
    angle: Fraction = ZERO

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", MapKind(self.kind))
        angle = as_fraction(self.angle, what="rotation angle")
        if self.kind is MapKind.ROTATION:
            if not 0 <= angle < 1:
                raise ValidationError(f"rotation angle {angle} outside [0, 1)")
        elif angle != 0:
            raise ValidationError(f"{self.kind.value} takes no angle")
        object.__setattr__(self, "angle", angle)

    @classmethod
    def parse(cls, text: str) -> "MapSpec":
        """Parse 'doubling', 'tent', 'logistic4', 'baker' or 'rotation(p/q)'"""
        match = _MAP_PATTERN.match(text.lower())
        if match is None or match.group(1) not in _ALIASES:
            raise ValidationError(f"unknown map {text!r}")
        kind = _ALIASES[match.group(1)]
        argument = match.group(2)
        if kind is MapKind.ROTATION:
            if not argument:
                raise ValidationError("rotation needs an angle, e.g. rotation(1/4)")
            return cls(kind, as_fraction(argument, what="rotation angle"))
        if argument:
            raise ValidationError(f"{kind.value} takes no argument")
        return cls(kind)

    def __str__(self) -> str:
        if self.kind is MapKind.ROTATION:
            return f"rotation({self.angle.numerator}/{self.angle.denominator})"
        return self.kind.value

    @property
    def is_two_dimensional(self) -> bool:
        return self.kind is MapKind.BAKER

    @property
    def is_chaotic(self) -> bool:
        return self.kind is not MapKind.ROTATION

    @property
    def domain(self) -> Interval:
        """Domain of the (x-)coordinate"""
        if self.kind in (MapKind.TENT, MapKind.LOGISTIC4):
            return Interval.closed(ZERO, ONE)
        return Interval(ZERO, ONE, True, False)

    @property
    def successor_policy(self) -> str:
        if self.kind in (MapKind.DOUBLING, MapKind.BAKER):
            return "shift"
        if self.kind is MapKind.ROTATION:
            return "translate"
        return "reset"

    def rotated(self, turn: Fraction) -> "MapSpec":
        """Rotation by this angle plus an accumulated turn, taken mod 1"""
        if self.kind is not MapKind.ROTATION:
            raise ValidationError(f"{self} is not a rotation")
        return MapSpec(MapKind.ROTATION, (self.angle + turn) % 1)

    @property
    def branches(self) -> Tuple[Branch, ...]:
        kind = self.kind
        if kind in (MapKind.DOUBLING, MapKind.BAKER):
            return (
                Branch(Interval(ZERO, HALF, True, False), _doubling_low, True),
                Branch(Interval(HALF, ONE, True, False), _doubling_high, True),
            )
        if kind is MapKind.TENT:
            return (
                Branch(Interval.closed(ZERO, HALF), _doubling_low, True),
                Branch(Interval.closed(HALF, ONE), _tent_down, False),
            )
        if kind is MapKind.LOGISTIC4:
            return (
                Branch(Interval.closed(ZERO, HALF), _logistic, True),
                Branch(Interval.closed(HALF, ONE), _logistic, False),
            )
        angle = self.angle
        if angle == 0:
            return (Branch(Interval(ZERO, ONE, True, False), lambda x: x, True),)
        cut = ONE - angle
        return (
            Branch(Interval(ZERO, cut, True, False), lambda x: x + angle, True),
            Branch(Interval(cut, ONE, True, False), lambda x: x + angle - 1, True),
        )

    def image(self, interval: Interval) -> Interval:
        """Hull of the branch-wise images of an interval of (x-)values"""
        result: Optional[Interval] = None
        for branch in self.branches:
            piece = interval.intersection(branch.domain)
            if piece is None:
                continue
            mapped = piece.map_monotone(branch.func, branch.increasing)
            result = mapped if result is None else result.hull(mapped)
        if result is None:
            raise DomainError(f"{interval} lies outside the domain of {self}")
        return result


def _coordinate(value: RationalLike, domain: Interval, spec: MapSpec) -> Fraction:
    q = as_fraction(value, what="map input")
    if not domain.contains(q):
        raise DomainError(f"{q} outside the domain {domain} of {spec}")
    return q


def step_exact(map_spec: MapSpec, x: ExactPoint) -> ExactPoint:
    """Exact image of a rational point; no rounding anywhere"""
    kind = map_spec.kind
    if kind is MapKind.BAKER:
        if not isinstance(x, tuple) or len(x) != 2:
            raise DomainError("baker map acts on (x, y) pairs")
        unit = Interval(ZERO, ONE, True, False)
        px = _coordinate(x[0], unit, map_spec)
        py = _coordinate(x[1], unit, map_spec)
        carry = math.floor(2 * px)
        return (2 * px - carry, (py + carry) / 2)
    if isinstance(x, tuple):
        raise DomainError(f"{map_spec} acts on single values")
    q = _coordinate(x, map_spec.domain, map_spec)
    if kind is MapKind.DOUBLING:
        return (2 * q) % 1
    if kind is MapKind.TENT:
        return 1 - abs(2 * q - 1)
    if kind is MapKind.LOGISTIC4:
        # 1/2 maps to the endpoint 1, which maps to the fixed point 0
        return _logistic(q)
    return (q + map_spec.angle) % 1
