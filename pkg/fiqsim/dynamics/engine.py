"""
Lazy-refinement evolution engine.

A step images the state interval of the current Fiq through the map. While
the image straddles an m-bit output boundary, the lowest undetermined input
bit is actualized and the image recomputed. Only the input digits the
dynamics actually demands ever become determined.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import structlog

from .. import __version__
from ..core.actualization import ActualizationPolicy, as_policy
from ..core.fiq import Determined, Fiq, information_content, state_interval
from ..core.literal import format_fiq
from ..core.numbers import Propensity, bit_information, leading_bits
from ..core.random_source import RandomSource
from ..exceptions import BudgetExhaustedError, ResourceExhaustionError, ValidationError
from .maps import MapKind, MapSpec, step_exact

logger = structlog.get_logger(__name__)

DEFAULT_BUDGET = 64

Source = Union[ActualizationPolicy, RandomSource]


@dataclass
class FiqPair:
    """Baker-map state: x drives the dynamics, y stores the bits shifted out"""
    x: Fiq
    y: Fiq


@dataclass
class RotatedFiq:
    """Rotation state: the input Fiq and the angle accumulated over earlier steps"""
    x: Fiq
    turn: Fraction = Fraction(0)


State = Union[Fiq, FiqPair, RotatedFiq]


@dataclass(frozen=True)
class StepResult:
    state: State
    emitted: str
    actualized: Tuple[int, ...]
    drawn: str
    priors: Tuple[Propensity, ...]
    successor: State
    interval_width: Fraction

    @property
    def information_gain(self) -> float:
        return math.fsum(1.0 - bit_information(q) for q in self.priors)


@dataclass(frozen=True)
class StepRecord:
    step: int
    emitted_digits: str
    actualized_positions: Tuple[int, ...]
    state_interval_width: Fraction
    information: float
    drawn_bits: str

    def to_row(self) -> Dict[str, str]:
        width = self.state_interval_width
        return {
            "step": str(self.step),
            "emitted_digits": self.emitted_digits,
            "actualized_positions": ";".join(str(p) for p in self.actualized_positions),
            "interval_width": f"{width.numerator}/{width.denominator}",
        }

    def to_dict(self) -> Dict[str, Any]:
        row: Dict[str, Any] = dict(self.to_row())
        row["step"] = self.step
        row["actualized_positions"] = list(self.actualized_positions)
        row["information"] = self.information
        row["drawn_bits"] = self.drawn_bits
        return row


@dataclass
class Trajectory:
    steps: List[StepRecord]
    manifest: Dict[str, Any]
    initial_condition: Optional[State] = field(default=None, repr=False)
    final_state: Optional[State] = field(default=None, repr=False)

    def emitted_stream(self) -> str:
        return "".join(record.emitted_digits for record in self.steps)

    def emitted_bits(self) -> np.ndarray:
        return np.frombuffer(self.emitted_stream().encode("ascii"), dtype=np.uint8) - ord("0")

    def actualized_positions(self) -> List[int]:
        return [p for record in self.steps for p in record.actualized_positions]

    @property
    def bits_consumed(self) -> int:
        return sum(len(record.actualized_positions) for record in self.steps)

    @property
    def final_information(self) -> float:
        return self.steps[-1].information if self.steps else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "manifest": dict(self.manifest),
            "steps": [record.to_dict() for record in self.steps],
        }


def _driver(state: State, map_spec: MapSpec) -> Fiq:
    if isinstance(state, RotatedFiq):
        if map_spec.kind is not MapKind.ROTATION:
            raise ValidationError(f"{map_spec} does not evolve rotated states")
        return state.x
    if map_spec.is_two_dimensional:
        if not isinstance(state, FiqPair):
            raise ValidationError(f"{map_spec} evolves FiqPair states")
        return state.x
    if not isinstance(state, Fiq):
        raise ValidationError(f"{map_spec} evolves single Fiq states")
    return state


def step_fiq(map_spec: MapSpec, x: State, m: int, rng: Source,
             budget: int = DEFAULT_BUDGET) -> StepResult:
    """
    One lazily refined step. Returns the input state with its newly
    determined bits, the m emitted output bits, the absolute addresses
    actualized, and the successor state.
    """
    if m < 1:
        raise ValidationError(f"output precision must be >= 1, got {m}")
    if budget < 1:
        raise ValidationError(f"budget must be >= 1, got {budget}")
    policy = as_policy(rng)
    fiq = _driver(x, map_spec)
    turn = x.turn if isinstance(x, RotatedFiq) else Fraction(0)
    stepper = map_spec.rotated(turn) if turn else map_spec

    actualized: List[int] = []
    drawn: List[str] = []
    priors: List[Propensity] = []

    def refine() -> None:
        if len(actualized) >= budget:
            raise BudgetExhaustedError(budget, actualized)
        n = fiq.lowest_undetermined()
        priors.append(fiq.propensity(n))
        drawn.append(str(fiq.actualize(n, policy)))
        actualized.append(fiq.address(n))

    while True:
        emitted = stepper.image(state_interval(fiq)).leading_bits(m)
        if emitted is not None:
            break
        refine()

    policy_name = map_spec.successor_policy
    successor: State
    if policy_name == "shift":
        shifted = fiq.suffix(1)
        if isinstance(x, FiqPair):
            lead = fiq.state(1)
            assert isinstance(lead, Determined), "leading bit is determined before emission"
            successor = FiqPair(shifted, x.y.prepend(lead.bit))
        else:
            successor = shifted
    elif policy_name == "translate":
        # the input is kept whole; only the accumulated angle moves
        successor = RotatedFiq(fiq, (turn + map_spec.angle) % 1)
    else:
        frontier = fiq.address(fiq.explicit_len)
        successor = Fiq.from_bits(emitted, origin=frontier - m)

    return StepResult(
        state=x,
        emitted=emitted,
        actualized=tuple(actualized),
        drawn="".join(drawn),
        priors=tuple(priors),
        successor=successor,
        interval_width=state_interval(fiq).width,
    )


def _copy_state(state: State) -> State:
    if isinstance(state, FiqPair):
        return FiqPair(state.x.copy(), state.y.copy())
    if isinstance(state, RotatedFiq):
        return RotatedFiq(state.x.copy(), state.turn)
    return state.copy()


def _describe_state(state: State) -> str:
    if isinstance(state, FiqPair):
        return f"({format_fiq(state.x)}, {format_fiq(state.y)})"
    if isinstance(state, RotatedFiq):
        return f"{format_fiq(state.x)} + {state.turn}"
    return format_fiq(state)


def evolve(map_spec: MapSpec, x0: State, steps: int, m: int, rng: Source,
           budget: int = DEFAULT_BUDGET, *, seed: Optional[int] = None,
           model: str = "fiq") -> Trajectory:
    """
    Iterate step_fiq, threading the state. The caller's x0 is left untouched;
    the returned trajectory's initial_condition holds the copy whose bits
    were actualized along the way.
    """
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    policy = as_policy(rng)
    if seed is None and isinstance(rng, RandomSource):
        seed = rng.seed

    initial = _copy_state(x0)
    driver = _driver(initial, map_spec)
    information = information_content(driver)

    manifest: Dict[str, Any] = {
        "map": str(map_spec),
        "seed": seed,
        "model": model,
        "precision": m,
        "budget": budget,
        "steps": steps,
        "successor_policy": map_spec.successor_policy,
        "initial": _describe_state(x0),
        "version": __version__,
    }
    manifest.update(policy.describe())

    log = logger.bind(map=str(map_spec), model=model, seed=seed)
    log.info("evolution_started", steps=steps, precision=m, budget=budget)

    records: List[StepRecord] = []
    state: State = initial
    for t in range(1, steps + 1):
        try:
            result = step_fiq(map_spec, state, m, policy, budget)
        except BudgetExhaustedError as e:
            log.warning("budget_exhausted", step=t, budget=budget)
            raise e.at_step(t) from e
        information += result.information_gain
        records.append(StepRecord(
            step=t,
            emitted_digits=result.emitted,
            actualized_positions=result.actualized,
            state_interval_width=result.interval_width,
            information=information,
            drawn_bits=result.drawn,
        ))
        state = result.successor

    trajectory = Trajectory(records, manifest, initial_condition=initial, final_state=state)
    log.info("evolution_finished", bits_consumed=trajectory.bits_consumed,
             information=information)
    return trajectory


@dataclass(frozen=True)
class DivergenceRecord:
    trial: int
    divergence_step: Optional[int]
    censored: bool


def _dyadic(bits: np.ndarray) -> Fraction:
    value = 0
    for bit in bits:
        value = (value << 1) | int(bit)
    return Fraction(value, 1 << len(bits))


def _lead(point: Union[Fraction, Tuple[Fraction, Fraction]], m: int) -> str:
    value = point[0] if isinstance(point, tuple) else point
    return leading_bits(value, m)


def _exact_size(point: Union[Fraction, Tuple[Fraction, Fraction]]) -> int:
    values = point if isinstance(point, tuple) else (point,)
    return max(v.denominator.bit_length() for v in values)


def divergence_experiment(map_spec: MapSpec, k: int, trials: int, rng: RandomSource,
                          horizon: int = 1000, tail_bits: int = 64, m: int = 1,
                          max_exact_bits: int = 1 << 20) -> List[DivergenceRecord]:
    """
    Sensitivity to far-down digits. Each trial builds two exact inputs that
    share their first k bits and a random tail but differ at bit k+1, and
    records the first time step at which their leading output bits differ.
    Trials that never diverge within the horizon are censored.
    """
    if k < 1 or trials < 1:
        raise ValidationError("k and trials must be >= 1")
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")

    records: List[DivergenceRecord] = []
    for trial in range(trials):
        prefix = rng.next_bits(k)
        flip = rng.next_bit()
        tail = rng.next_bits(tail_bits)
        a = _dyadic(np.concatenate([prefix, [flip], tail]))
        b = _dyadic(np.concatenate([prefix, [1 - flip], tail]))
        if map_spec.is_two_dimensional:
            y = _dyadic(rng.next_bits(tail_bits))
            pa: Union[Fraction, Tuple[Fraction, Fraction]] = (a, y)
            pb: Union[Fraction, Tuple[Fraction, Fraction]] = (b, y)
        else:
            pa, pb = a, b

        divergence: Optional[int] = None
        for t in range(1, horizon + 1):
            pa = step_exact(map_spec, pa)
            pb = step_exact(map_spec, pb)
            if _lead(pa, m) != _lead(pb, m):
                divergence = t
                break
            if pa == pb:
                break
            size = max(_exact_size(pa), _exact_size(pb))
            if size > max_exact_bits:
                raise ResourceExhaustionError(
                    "exact_bits",
                    f"{map_spec} denominators reached {size} bits at step {t} "
                    f"of trial {trial}; lower the horizon or k",
                )
        records.append(DivergenceRecord(trial, divergence, divergence is None))

    logger.info("divergence_experiment_finished", map=str(map_spec), k=k, trials=trials,
                censored=sum(r.censored for r in records))
    return records
