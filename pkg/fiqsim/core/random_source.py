"""
Seeded, counter-addressable bit streams.

Bits come from numpy's Philox counter-based generator keyed by
(domain, lane, seed). A block of bits is a pure function of its key and
block index, so streams are bit-exact across platforms and can be read at
any absolute position without replaying the prefix.
"""

from typing import Dict

import numpy as np
import structlog

from ..exceptions import ValidationError
from .numbers import HALF, Propensity, RationalLike

logger = structlog.get_logger(__name__)

SEED_LIMIT = 1 << 64
LANE_LIMIT = 1 << 32

BLOCK_WORDS = 64
BLOCK_BITS = BLOCK_WORDS * 64
# Philox4x64 yields four words per counter increment
_COUNTER_STRIDE = BLOCK_WORDS // 4


def validate_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValidationError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise ValidationError(f"seed {seed} outside [0, 2^64)")
    return seed


class BitBlockStream:
    """Fair bits addressed by 0-based index, generated lazily in blocks"""

    def __init__(self, seed: int, lane: int = 0, domain: int = 0):
        self.seed = validate_seed(seed)
        if not 0 <= lane < LANE_LIMIT:
            raise ValidationError(f"lane {lane} outside [0, 2^32)")
        if not 0 <= domain < LANE_LIMIT:
            raise ValidationError(f"domain {domain} outside [0, 2^32)")
        self.lane = lane
        self.domain = domain
        self._key = (domain << 96) | (lane << 64) | self.seed
        self._blocks: Dict[int, np.ndarray] = {}

    def _block(self, index: int) -> np.ndarray:
        block = self._blocks.get(index)
        if block is None:
            generator = np.random.Philox(key=self._key, counter=index * _COUNTER_STRIDE)
            words = generator.random_raw(BLOCK_WORDS).astype("<u8")
            block = np.unpackbits(words.view(np.uint8))
            self._blocks[index] = block
        return block

    def bit(self, index: int) -> int:
        if index < 0:
            raise ValidationError(f"bit index {index} is negative")
        block, offset = divmod(index, BLOCK_BITS)
        return int(self._block(block)[offset])

    def bits(self, start: int, count: int) -> np.ndarray:
        """Bits start .. start+count-1 as a uint8 array"""
        if start < 0 or count < 0:
            raise ValidationError("bit range must be non-negative")
        if count == 0:
            return np.zeros(0, dtype=np.uint8)
        first = start // BLOCK_BITS
        last = (start + count - 1) // BLOCK_BITS
        joined = np.concatenate([self._block(i) for i in range(first, last + 1)])
        offset = start - first * BLOCK_BITS
        return joined[offset:offset + count].copy()


class RandomSource:
    """
    Sequential consumer of a bit stream, the source of actualization draws.

    Propensities 0 and 1 consume nothing, propensity 1/2 consumes exactly one
    bit, and any other rational q is drawn by comparing a lazily generated
    uniform against the binary expansion of q.
    """

    def __init__(self, seed: int, lane: int = 0, domain: int = 0):
        self._stream = BitBlockStream(seed, lane=lane, domain=domain)
        self._position = 0

    @property
    def seed(self) -> int:
        return self._stream.seed

    @property
    def lane(self) -> int:
        return self._stream.lane

    @property
    def position(self) -> int:
        """Number of bits consumed so far"""
        return self._position

    def next_bit(self) -> int:
        bit = self._stream.bit(self._position)
        self._position += 1
        return bit

    def next_bits(self, count: int) -> np.ndarray:
        bits = self._stream.bits(self._position, count)
        self._position += count
        return bits

    def draw(self, propensity: RationalLike) -> int:
        q = Propensity.of(propensity).value
        if q == 0:
            return 0
        if q == 1:
            return 1
        if q == HALF:
            return self.next_bit()
        return self._bernoulli(q)

    def _bernoulli(self, q) -> int:
        # 1 iff U < q, decided at the first digit where U and q differ
        remainder = q
        while True:
            remainder *= 2
            digit = 1 if remainder >= 1 else 0
            remainder -= digit
            u = self.next_bit()
            if u != digit:
                return 1 if u < digit else 0

    def spawn(self, lane: int) -> "RandomSource":
        """Independent stream for the same seed"""
        return RandomSource(self.seed, lane=lane, domain=self._stream.domain)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, lane={self.lane}, position={self._position})"
