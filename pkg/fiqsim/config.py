"""
Configuration Management for the FIQ Simulation Toolkit
=======================================================

Settings come from the environment (prefix FIQSIM_) and an optional .env
file. Each subcommand has its own RunConfig model; a persisted RunConfig
re-executed with the same library version reproduces its outputs.
"""

import hashlib
import json
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings

from .core.fiq import Fiq
from .core.literal import parse_fiq
from .dynamics.engine import FiqPair, State
from .dynamics.maps import MapSpec
from .exceptions import FiqSimError
from .supplement.quantum import BinaryMeasurement, QState


class Settings(BaseSettings):
    """Toolkit settings with validation"""

    # Logging
    log_level: str = Field(
        "WARNING",
        pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$",
        description="Logging level",
    )
    log_file: Optional[str] = Field(None, description="Optional JSON log file path")

    # Dynamics
    default_budget: int = Field(64, ge=1, le=100000, description="Actualizations allowed per step")
    max_exact_bits: int = Field(
        1 << 20, ge=64, description="Largest denominator (in bits) exact iteration may reach"
    )

    # Measurement model
    comparison_limit_bits: int = Field(
        256, ge=8, le=65536, description="Prefix-extension limit for r1 <= p comparisons"
    )

    # Statistics
    alpha: float = Field(0.001, gt=0.0, lt=1.0, description="Significance level for verdicts")
    min_ensemble_size: int = Field(50, ge=1, description="Smallest ensemble compare accepts")

    # Execution
    max_workers: int = Field(1, ge=1, le=64, description="Processes for ensemble members")

    class Config:
        env_file = ".env"
        case_sensitive = False
        env_prefix = "FIQSIM_"


def _rational(value: str, what: str, *, low: Fraction = Fraction(0),
              high: Fraction = Fraction(1)) -> str:
    try:
        q = Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"{what} {value!r} is not an exact rational 'num/den'")
    if not low <= q <= high:
        raise ValueError(f"{what} {q} outside [{low}, {high}]")
    return f"{q.numerator}/{q.denominator}"


def _map(value: str) -> str:
    try:
        return str(MapSpec.parse(value))
    except FiqSimError as e:
        raise ValueError(e.message)


def _literal(value: str) -> str:
    try:
        parse_fiq(value)
    except FiqSimError as e:
        raise ValueError(f"fiq literal {value!r}: {e.message}")
    return value


class RunConfig(BaseModel):
    """Fields shared by every subcommand"""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(0, ge=0, lt=1 << 64, description="Base seed; always explicit in outputs")

    def payload(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    def config_hash(self) -> str:
        canonical = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class EvolveConfig(RunConfig):
    """Single trajectory under the fiq or tape model"""

    map: str = Field("doubling", description="doubling | tent | logistic4 | baker | rotation(p/q)")
    initial: str = Field("*", description="Fiq literal of the initial condition")
    initial_y: str = Field("*", description="Fiq literal of the baker y-coordinate")
    model: str = Field("fiq", pattern="^(fiq|tape)$")
    steps: int = Field(50, ge=1, le=1_000_000)
    precision: int = Field(1, ge=1, le=64, description="Output bits emitted per step")
    budget: Optional[int] = Field(None, ge=1, description="Actualizations per step")
    policy: str = Field("independent", pattern="^(independent|correlated)$")
    correlation: str = Field("0", description="Repeat probability for the correlated policy")
    lane: int = Field(0, ge=0, lt=1 << 32, description="Stream lane of the seed")

    @field_validator("map")
    @classmethod
    def validate_map(cls, v):
        return _map(v)

    @field_validator("initial", "initial_y")
    @classmethod
    def validate_initial(cls, v):
        return _literal(v)

    @field_validator("correlation")
    @classmethod
    def validate_correlation(cls, v):
        return _rational(v, "correlation")

    @model_validator(mode="after")
    def validate_model_policy(self):
        if self.model == "tape" and self.policy != "independent":
            raise ValueError("the tape model reads its bits; only the fiq model takes a policy")
        return self

    def map_spec(self) -> MapSpec:
        return MapSpec.parse(self.map)

    def initial_state(self) -> State:
        x = parse_fiq(self.initial)
        if self.map_spec().is_two_dimensional:
            return FiqPair(x, parse_fiq(self.initial_y))
        return x


class CompareConfig(RunConfig):
    """Fiq-model ensemble against tape-model ensemble"""

    map: str = Field("doubling")
    seeds: int = Field(200, ge=1, description="Ensemble size per model")
    length: int = Field(1000, ge=1, description="Emitted bits per stream")
    precision: int = Field(1, ge=1, le=64)
    budget: Optional[int] = Field(None, ge=1)
    block_lengths: List[int] = Field(default_factory=lambda: [1, 2, 3, 4])
    lag: int = Field(1, ge=1)
    max_k: int = Field(4, ge=1, le=16)
    alpha: Optional[float] = Field(None, gt=0.0, lt=1.0)
    fiq_bias: Optional[str] = Field(
        None, description="Test hook: propensity injected into every fiq-side input bit"
    )

    @field_validator("map")
    @classmethod
    def validate_map(cls, v):
        return _map(v)

    @field_validator("block_lengths")
    @classmethod
    def validate_block_lengths(cls, v):
        if not v:
            raise ValueError("block_lengths must not be empty")
        if any(not 1 <= k <= 8 for k in v):
            raise ValueError("block lengths must be in 1..8")
        return sorted(set(v))

    @field_validator("fiq_bias")
    @classmethod
    def validate_bias(cls, v):
        return None if v is None else _rational(v, "fiq_bias")

    def map_spec(self) -> MapSpec:
        return MapSpec.parse(self.map)


class MeasurementSpec(BaseModel):
    """State and projector as nested [re, im] pairs"""

    model_config = ConfigDict(extra="forbid")

    state: List[List[float]]
    projector: List[List[List[float]]]

    @model_validator(mode="after")
    def validate_invariants(self):
        try:
            self.build()
        except FiqSimError as e:
            raise ValueError(e.message)
        return self

    def build(self):
        return QState.from_pairs(self.state), BinaryMeasurement.from_pairs(self.projector)


class QMeasureConfig(RunConfig):
    """Repeated binary measurements driven by uniform hidden variables"""

    sequence: List[Union[str, MeasurementSpec]] = Field(
        default_factory=list,
        validate_default=True,
        description="Measurements in order: exact 'num/den' probabilities or state/projector pairs",
    )
    trials: int = Field(1000, ge=1)
    limit: Optional[int] = Field(None, ge=8, description="Comparison prefix limit in bits")

    @field_validator("sequence", mode="before")
    @classmethod
    def validate_sequence(cls, v):
        if not v:
            raise ValueError("give at least one probability or (state, projector) measurement")
        return [
            item if isinstance(item, (dict, MeasurementSpec)) else _rational(item, "probability")
            for item in v
        ]

    def measurables(self) -> list:
        return [
            Fraction(item) if isinstance(item, str) else item.build() for item in self.sequence
        ]


class DivergeConfig(RunConfig):
    """Divergence times of inputs that differ first at bit k+1"""

    map: str = Field("doubling")
    k: List[int] = Field(default_factory=lambda: [10])
    trials: int = Field(100, ge=1)
    horizon: int = Field(1000, ge=1)
    tail_bits: int = Field(64, ge=0)
    precision: int = Field(1, ge=1, le=64)

    @field_validator("map")
    @classmethod
    def validate_map(cls, v):
        return _map(v)

    @field_validator("k")
    @classmethod
    def validate_k(cls, v):
        if not v:
            raise ValueError("k list must not be empty")
        if any(k < 1 for k in v):
            raise ValueError("every k must be >= 1")
        return v

    def map_spec(self) -> MapSpec:
        return MapSpec.parse(self.map)


CONFIG_MODELS = {
    "evolve": EvolveConfig,
    "compare": CompareConfig,
    "qmeasure": QMeasureConfig,
    "diverge": DivergeConfig,
}
