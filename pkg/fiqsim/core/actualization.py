"""
Actualization policies: how an undetermined bit acquires its value.

Every draw goes through ActualizationPolicy.draw(address, propensity), so
the dynamics engine never needs to know where bits come from.
"""

from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Optional, Union

from ..exceptions import ValidationError
from .numbers import Propensity, RationalLike, as_fraction
from .random_source import RandomSource


class ActualizationPolicy(ABC):
    """Source of values for newly determined bits"""

    name: str = "abstract"

    @abstractmethod
    def draw(self, address: int, propensity: Propensity) -> int:
        """Value for the input bit at absolute address"""

    def describe(self) -> dict:
        return {"policy": self.name}


class IndependentPolicy(ActualizationPolicy):
    """Each bit drawn independently from its own propensity"""

    name = "independent"

    def __init__(self, source: RandomSource):
        self.source = source

    def draw(self, address: int, propensity: Propensity) -> int:
        return self.source.draw(propensity)


class CorrelatedPolicy(ActualizationPolicy):
    """
    Newly determined bits correlated with their predecessor: with
    probability `correlation` the previous actualized bit is repeated,
    otherwise the bit is drawn from its propensity. Correlation 0 is the
    independent policy.
    """

    name = "correlated"

    def __init__(self, source: RandomSource, correlation: RationalLike):
        rho = as_fraction(correlation, what="correlation")
        if not 0 <= rho <= 1:
            raise ValidationError(f"correlation {rho} outside [0, 1]")
        self.source = source
        self.correlation: Fraction = rho
        self._previous: Optional[int] = None

    def draw(self, address: int, propensity: Propensity) -> int:
        if propensity.is_certain:
            bit = int(propensity.value)
        elif self._previous is not None and self.source.draw(self.correlation):
            bit = self._previous
        else:
            bit = self.source.draw(propensity)
        self._previous = bit
        return bit

    def describe(self) -> dict:
        return {"policy": self.name, "correlation": str(self.correlation)}


def as_policy(source: Union[ActualizationPolicy, RandomSource]) -> ActualizationPolicy:
    if isinstance(source, ActualizationPolicy):
        return source
    if isinstance(source, RandomSource):
        return IndependentPolicy(source)
    raise ValidationError(
        f"expected a RandomSource or ActualizationPolicy, got {type(source).__name__}"
    )
