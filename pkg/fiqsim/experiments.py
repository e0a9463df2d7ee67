"""
Experiment runner behind the CLI subcommands.

Each method takes a validated RunConfig and returns plain payloads; the CLI
decides where they are written. Ensemble outputs are ordered by seed, then
step, whatever order the members finished in.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from .config import CompareConfig, DivergeConfig, EvolveConfig, QMeasureConfig, Settings
from .core.actualization import ActualizationPolicy, CorrelatedPolicy, IndependentPolicy
from .core.fiq import Fiq
from .core.random_source import RandomSource
from .dynamics.engine import FiqPair, State, Trajectory, divergence_experiment, evolve
from .dynamics.maps import MapSpec
from .exceptions import ConfigurationError, FiqSimError, ProcessingError, ValidationError
from .stats.battery import (
    DigitStream,
    TestReport,
    binomial_frequency_test,
    run_battery,
    two_sample_equivalence,
)
from .supplement.quantum import HiddenVar, born_probability, run_measurement_sequence
from .supplement.tape import BitTape, evolve_supplemented

logger = structlog.get_logger(__name__)

ProgressCallback = Callable[[str, int, int], None]

CONVENTION_NOTE = (
    "The significance level and the test battery are toolkit conventions, "
    "not a quantitative criterion for indistinguishability."
)


@dataclass(frozen=True)
class MemberSpec:
    """One ensemble member, picklable for the process pool"""
    map: str
    model: str
    seed: int
    steps: int
    precision: int
    budget: int
    length: int
    bias: Optional[str] = None


def _biased_initial(map_spec: MapSpec, bias: Fraction, positions: int) -> State:
    x = Fiq()
    for n in range(1, positions + 1):
        x.set_propensity(n, bias)
    return FiqPair(x, Fiq()) if map_spec.is_two_dimensional else x


MemberResult = Tuple[Optional[np.ndarray], Optional[str]]


def run_member(spec: MemberSpec) -> MemberResult:
    """Emitted bits of one ensemble member, or the message of the error that stopped it"""
    map_spec = MapSpec.parse(spec.map)
    try:
        if spec.model == "tape":
            trajectory = evolve_supplemented(
                map_spec, BitTape(spec.seed), spec.steps, spec.precision, spec.budget
            )
        else:
            if spec.bias is not None:
                x0 = _biased_initial(map_spec, Fraction(spec.bias), spec.steps + spec.precision)
            else:
                x0 = FiqPair(Fiq(), Fiq()) if map_spec.is_two_dimensional else Fiq()
            trajectory = evolve(map_spec, x0, spec.steps, spec.precision,
                                RandomSource(spec.seed), spec.budget, model="fiq")
    except FiqSimError as e:
        # custom exceptions do not survive the trip back from a worker process
        return None, e.message
    return trajectory.emitted_bits()[: spec.length], None


class ExperimentRunner:
    """Runs experiments with the toolkit settings"""

    def __init__(self, settings: Settings, progress_callback: Optional[ProgressCallback] = None):
        self.settings = settings
        self.progress_callback = progress_callback

    def _progress(self, stage: str, done: int, total: int) -> None:
        if self.progress_callback:
            self.progress_callback(stage, done, total)

    # -- evolve -----------------------------------------------------------

    def _policy(self, config: EvolveConfig) -> ActualizationPolicy:
        source = RandomSource(config.seed, lane=config.lane)
        if config.policy == "correlated":
            return CorrelatedPolicy(source, Fraction(config.correlation))
        return IndependentPolicy(source)

    def evolve(self, config: EvolveConfig) -> Trajectory:
        map_spec = config.map_spec()
        budget = config.budget or self.settings.default_budget
        x0 = config.initial_state()
        if config.model == "tape":
            tape = BitTape(config.seed, lane=config.lane)
            return evolve_supplemented(map_spec, tape, config.steps, config.precision,
                                       budget, x0=x0)
        return evolve(map_spec, x0, config.steps, config.precision, self._policy(config),
                      budget, seed=config.seed, model="fiq")

    # -- compare ----------------------------------------------------------

    def _ensemble(self, members: Sequence[MemberSpec], stage: str) -> List[np.ndarray]:
        outcomes: List[MemberResult] = []
        if self.settings.max_workers > 1:
            with ProcessPoolExecutor(max_workers=self.settings.max_workers) as pool:
                # map preserves submission order, which is seed order
                for i, outcome in enumerate(pool.map(run_member, members), start=1):
                    outcomes.append(outcome)
                    self._progress(stage, i, len(members))
        else:
            for i, member in enumerate(members, start=1):
                outcomes.append(run_member(member))
                self._progress(stage, i, len(members))

        results: List[np.ndarray] = []
        for member, (bits, error) in zip(members, outcomes):
            if bits is None:
                raise ProcessingError(f"{member.model} seed {member.seed}", error or "failed")
            results.append(bits)
        return results

    def compare(self, config: CompareConfig) -> Dict[str, Any]:
        n = config.seeds
        if n < self.settings.min_ensemble_size:
            raise ValidationError(
                f"ensemble too small: {n} seeds per model, "
                f"need at least {self.settings.min_ensemble_size}"
            )
        map_spec = config.map_spec()
        if config.fiq_bias is not None and map_spec.successor_policy != "shift":
            raise ConfigurationError(
                f"fiq_bias needs a map whose successor keeps the input bits; {map_spec} resets them"
            )
        alpha = config.alpha if config.alpha is not None else self.settings.alpha
        budget = config.budget or self.settings.default_budget
        steps = math.ceil(config.length / config.precision)

        fiq_seeds = [config.seed + i for i in range(n)]
        tape_seeds = [config.seed + n + i for i in range(n)]

        def members(model: str, seeds: List[int], bias: Optional[str]) -> List[MemberSpec]:
            return [
                MemberSpec(str(map_spec), model, s, steps, config.precision, budget,
                           config.length, bias)
                for s in seeds
            ]

        log = logger.bind(map=str(map_spec), seeds=n, length=config.length)
        log.info("compare_started", fiq_bias=config.fiq_bias)
        fiq_bits = self._ensemble(members("fiq", fiq_seeds, config.fiq_bias), "fiq")
        tape_bits = self._ensemble(members("tape", tape_seeds, None), "tape")

        a = [DigitStream(b, model="fiq", map=str(map_spec), seed=s)
             for b, s in zip(fiq_bits, fiq_seeds)]
        b = [DigitStream(t, model="tape", map=str(map_spec), seed=s)
             for t, s in zip(tape_bits, tape_seeds)]

        equivalence = [two_sample_equivalence(a, b, k, alpha) for k in config.block_lengths]
        battery: Dict[str, List[TestReport]] = {}
        for model, ensemble in (("fiq", a), ("tape", b)):
            pooled = DigitStream(np.concatenate([s.bits for s in ensemble]),
                                 model=model, map=str(map_spec))
            battery[model] = run_battery(pooled, config.block_lengths, config.lag,
                                         config.max_k, alpha)

        distinguished = any(report.rejected for report in equivalence)
        verdict = "distinguished" if distinguished else f"indistinguishable at α={alpha:g}"
        log.info("compare_finished", verdict=verdict)
        return {
            "verdict": verdict,
            "alpha": alpha,
            "seeds": {"fiq": [fiq_seeds[0], fiq_seeds[-1]],
                      "tape": [tape_seeds[0], tape_seeds[-1]]},
            "equivalence": equivalence,
            "battery": battery,
            "note": CONVENTION_NOTE,
        }

    # -- qmeasure ---------------------------------------------------------

    def qmeasure(self, config: QMeasureConfig) -> Dict[str, Any]:
        sequence = config.measurables()
        limit = config.limit or self.settings.comparison_limit_bits
        # Born probabilities are computed once, not per trial
        resolved: List[Union[Fraction, float]] = [
            born_probability(*item) if isinstance(item, tuple) else item for item in sequence
        ]
        probabilities: List[Tuple[str, float]] = [
            (f"{p.numerator}/{p.denominator}", float(p)) if isinstance(p, Fraction) else (repr(p), p)
            for p in resolved
        ]

        outcomes = np.zeros((config.trials, len(sequence)), dtype=np.int8)
        for trial in range(config.trials):
            r0 = HiddenVar.uniform(config.seed, lane=trial)
            outcomes[trial] = run_measurement_sequence(resolved, r0, limit, trial=trial)
            if (trial + 1) % 1000 == 0 or trial + 1 == config.trials:
                self._progress("qmeasure", trial + 1, config.trials)

        steps = []
        for index, (label, p) in enumerate(probabilities):
            plus = int(np.count_nonzero(outcomes[:, index] == 1))
            report = binomial_frequency_test(plus, config.trials, p, self.settings.alpha)
            steps.append({
                "step": index + 1,
                "p": label,
                "frequency": plus / config.trials,
                "tolerance_4sigma": 4 * math.sqrt(p * (1 - p) / config.trials),
                "report": report,
            })
        logger.info("qmeasure_finished", trials=config.trials, steps=len(sequence))
        return {"outcomes": outcomes, "steps": steps, "limit": limit}

    # -- diverge ----------------------------------------------------------

    def diverge(self, config: DivergeConfig) -> Dict[str, Any]:
        map_spec = config.map_spec()
        rows: List[Dict[str, Any]] = []
        summary: List[Dict[str, Any]] = []
        root = RandomSource(config.seed)
        for lane, k in enumerate(config.k):
            records = divergence_experiment(
                map_spec, k, config.trials, root.spawn(lane),
                horizon=config.horizon, tail_bits=config.tail_bits, m=config.precision,
                max_exact_bits=self.settings.max_exact_bits,
            )
            times = [r.divergence_step for r in records if r.divergence_step is not None]
            summary.append({
                "k": k,
                "trials": config.trials,
                "censored": sum(r.censored for r in records),
                "mean": float(np.mean(times)) if times else None,
                "min": min(times) if times else None,
                "max": max(times) if times else None,
            })
            rows.extend({
                "k": k,
                "trial": r.trial,
                "divergence_step": "" if r.divergence_step is None else r.divergence_step,
                "censored": str(r.censored).lower(),
            } for r in records)
            self._progress("diverge", lane + 1, len(config.k))
        return {"rows": rows, "summary": summary}
