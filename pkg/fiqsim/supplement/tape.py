"""
The real-number supplementation of classical dynamics.

A BitTape stands in for the infinitely deep digits of a real initial
condition: bit n is a pure function of (seed, lane, n). Evolving with a tape
runs exactly the fiq algorithm, except every would-be actualization of
input address n reads tape bit n instead of drawing.

Tape bit n is bit n-1 of the RandomSource stream with the same seed and
lane, so a fiq run whose draws start at address 1 and a tape run with the
same seed consume one shared bit source.
"""

from typing import Optional

import numpy as np

from ..core.actualization import ActualizationPolicy
from ..core.fiq import Fiq
from ..core.numbers import HALF, Propensity
from ..core.random_source import BitBlockStream, RandomSource
from ..dynamics.engine import DEFAULT_BUDGET, FiqPair, State, Trajectory, evolve
from ..dynamics.maps import MapSpec
from ..exceptions import PositionError

# domain of the auxiliary stream used for biased propensities on the tape side
AUX_DOMAIN = 1


class BitTape:
    """Seed-determined, lazily extended bit sequence addressed from 1"""

    def __init__(self, seed: int, lane: int = 0):
        self._stream = BitBlockStream(seed, lane=lane)
        self._generated = 0

    @property
    def seed(self) -> int:
        return self._stream.seed

    @property
    def lane(self) -> int:
        return self._stream.lane

    @property
    def generated(self) -> int:
        """Highest position read so far"""
        return self._generated

    def bit(self, n: int) -> int:
        if n < 1:
            raise PositionError(n, "tape positions start at 1")
        if n > self._generated:
            self._generated = n
        return self._stream.bit(n - 1)

    def bits(self, start: int, count: int) -> np.ndarray:
        """Positions start .. start+count-1"""
        if start < 1:
            raise PositionError(start, "tape positions start at 1")
        self._generated = max(self._generated, start + count - 1)
        return self._stream.bits(start - 1, count)

    def __repr__(self) -> str:
        return f"BitTape(seed={self.seed}, lane={self.lane})"


def tape_bit(tape: BitTape, n: int) -> int:
    return tape.bit(n)


class TapePolicy(ActualizationPolicy):
    """
    Reads input address n off the tape. Propensity-1/2 bits are the tape
    bits themselves; other propensities are decided against an auxiliary
    uniform derived from the same seed.
    """

    name = "tape"

    def __init__(self, tape: BitTape):
        self.tape = tape
        self._aux = RandomSource(tape.seed, lane=tape.lane, domain=AUX_DOMAIN)

    def draw(self, address: int, propensity: Propensity) -> int:
        q = propensity.value
        if q == HALF:
            return self.tape.bit(address)
        return self._aux.draw(q)

    def describe(self) -> dict:
        return {"policy": self.name, "tape_seed": self.tape.seed, "tape_lane": self.tape.lane}


def evolve_supplemented(map_spec: MapSpec, tape: BitTape, steps: int, m: int,
                        budget: int = DEFAULT_BUDGET,
                        x0: Optional[State] = None) -> Trajectory:
    """
    Deterministic evolution: the tape fixes every future digit. The default
    initial state is the all-tail Fiq, so every input digit comes off the
    tape.
    """
    if x0 is None:
        x0 = FiqPair(Fiq(), Fiq()) if map_spec.is_two_dimensional else Fiq()
    return evolve(map_spec, x0, steps, m, TapePolicy(tape), budget,
                  seed=tape.seed, model="tape")
