"""
Shared fixtures for the FIQ Simulation Toolkit tests.
"""

import csv
from fractions import Fraction
from pathlib import Path
from typing import Dict, List

import pytest

from fiqsim.config import Settings
from fiqsim.core.random_source import RandomSource
from fiqsim.dynamics.maps import MapSpec

CHAOTIC_MAPS = ["doubling", "tent", "logistic4", "baker"]


@pytest.fixture
def settings(monkeypatch):
    """Settings isolated from any FIQSIM_* variables in the environment"""
    for name in ("LOG_LEVEL", "LOG_FILE", "MIN_ENSEMBLE_SIZE", "MAX_WORKERS", "ALPHA"):
        monkeypatch.delenv(f"FIQSIM_{name}", raising=False)
    return Settings(_env_file=None)


@pytest.fixture
def rng():
    return RandomSource(20240601)


@pytest.fixture
def doubling():
    return MapSpec.parse("doubling")


@pytest.fixture
def quarter_rotation():
    return MapSpec.parse("rotation(1/4)")


def dyadic(bits: str) -> Fraction:
    """Exact value of a finite binary expansion 0.b1b2..."""
    return Fraction(int(bits, 2), 1 << len(bits))


def read_csv_rows(path: Path) -> List[Dict[str, str]]:
    """Data rows of an output CSV, provenance comment skipped"""
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(line for line in handle if not line.startswith("#")))
