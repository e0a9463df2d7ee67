"""Discrete-time evolution of Fiq states under unit-interval maps."""

from .engine import (
    DEFAULT_BUDGET,
    DivergenceRecord,
    FiqPair,
    RotatedFiq,
    StepRecord,
    StepResult,
    Trajectory,
    divergence_experiment,
    evolve,
    step_fiq,
)
from .maps import MapKind, MapSpec, step_exact

__all__ = [
    "DEFAULT_BUDGET",
    "DivergenceRecord",
    "FiqPair",
    "MapKind",
    "MapSpec",
    "RotatedFiq",
    "StepRecord",
    "StepResult",
    "Trajectory",
    "divergence_experiment",
    "evolve",
    "step_exact",
    "step_fiq",
]
