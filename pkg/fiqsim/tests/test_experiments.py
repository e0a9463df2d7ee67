"""
Tests for the experiment runner behind the CLI subcommands.
"""

import numpy as np
import pytest

from fiqsim.config import CompareConfig, DivergeConfig, EvolveConfig, QMeasureConfig
from fiqsim.core import BitBlockStream, RandomSource
from fiqsim.dynamics import MapSpec, divergence_experiment
from fiqsim.exceptions import ConfigurationError, ProcessingError, ValidationError
from fiqsim.experiments import ExperimentRunner, MemberSpec, run_member


@pytest.fixture
def small_settings(settings):
    return settings.model_copy(update={"min_ensemble_size": 5})


@pytest.fixture
def runner(small_settings):
    return ExperimentRunner(small_settings)


def test_member_emits_the_shifted_stream():
    bits, error = run_member(MemberSpec("doubling", "fiq", 3, 10, 1, 64, 8))
    assert error is None
    assert list(bits) == list(BitBlockStream(3).bits(1, 8))


def test_member_reports_errors_as_messages():
    bits, error = run_member(MemberSpec("doubling", "fiq", 3, 10, 1, 1, 8))
    assert bits is None
    assert "budget of 1 exhausted" in error


def test_evolve_models_share_the_seed_stream(runner):
    fiq_run = runner.evolve(EvolveConfig(seed=7, steps=40))
    tape_run = runner.evolve(EvolveConfig(seed=7, steps=40, model="tape"))
    assert fiq_run.emitted_stream() == tape_run.emitted_stream()
    assert tape_run.manifest["model"] == "tape"
    assert fiq_run.manifest["seed"] == 7


def test_evolve_uses_default_budget(runner):
    trajectory = runner.evolve(EvolveConfig(seed=1, steps=5))
    assert trajectory.manifest["budget"] == 64


def test_compare_small_ensemble(small_settings, mocker):
    callback = mocker.Mock()
    runner = ExperimentRunner(small_settings, progress_callback=callback)
    result = runner.compare(CompareConfig(seed=0, seeds=5, length=200))
    assert result["seeds"] == {"fiq": [0, 4], "tape": [5, 9]}
    assert [r.block_length for r in result["equivalence"]] == [1, 2, 3, 4]
    assert set(result["battery"]) == {"fiq", "tape"}
    assert result["battery"]["fiq"][0].sample_size == 1000
    assert result["alpha"] == 0.001
    callback.assert_any_call("fiq", 5, 5)
    callback.assert_any_call("tape", 5, 5)


def test_compare_rejects_small_ensembles(runner):
    with pytest.raises(ValidationError, match="ensemble too small"):
        runner.compare(CompareConfig(seeds=4, length=200))


def test_compare_bias_needs_a_shift_map(runner):
    with pytest.raises(ConfigurationError):
        runner.compare(CompareConfig(map="tent", seeds=5, length=200, fiq_bias="3/4"))


def test_compare_surfaces_member_failures(runner):
    with pytest.raises(ProcessingError, match="fiq seed 0"):
        runner.compare(CompareConfig(seeds=5, length=200, budget=1))


@pytest.mark.slow
def test_biased_fiq_ensemble_is_distinguished(settings):
    runner = ExperimentRunner(settings)
    result = runner.compare(CompareConfig(seeds=50, length=1000, fiq_bias="3/4"))
    assert result["verdict"] == "distinguished"
    assert result["equivalence"][0].p_value < 1e-6


@pytest.mark.slow
def test_unbiased_ensembles_are_indistinguishable(settings):
    result = ExperimentRunner(settings).compare(CompareConfig(seed=1, seeds=200, length=1000))
    assert result["verdict"] == "indistinguishable at α=0.001"


def test_qmeasure_certain_outcomes(runner):
    result = runner.qmeasure(QMeasureConfig(sequence=["1", "0"], trials=20))
    assert np.all(result["outcomes"][:, 0] == 1)
    assert np.all(result["outcomes"][:, 1] == -1)
    assert [s["p"] for s in result["steps"]] == ["1/1", "0/1"]
    assert all(s["report"].verdict == "pass" for s in result["steps"])
    assert result["limit"] == 256


def test_qmeasure_fair_frequency(runner):
    result = runner.qmeasure(QMeasureConfig(seed=3, sequence=["1/2"], trials=2000))
    step = result["steps"][0]
    assert abs(step["frequency"] - 0.5) <= step["tolerance_4sigma"]
    assert result["outcomes"].shape == (2000, 1)


def test_diverge_doubling_is_exact(runner):
    result = runner.diverge(DivergeConfig(k=[5, 10], trials=50))
    assert [s["mean"] for s in result["summary"]] == [5.0, 10.0]
    assert all(s["censored"] == 0 for s in result["summary"])
    assert len(result["rows"]) == 100
    assert result["rows"][0]["censored"] == "false"


def test_diverge_draws_each_k_from_its_own_lane(runner):
    config = DivergeConfig(map="tent", seed=4, k=[5, 8], trials=20)
    rows = runner.diverge(config)["rows"]
    expected = divergence_experiment(
        MapSpec.parse("tent"), 8, 20, RandomSource(4).spawn(1), horizon=config.horizon,
        tail_bits=config.tail_bits, m=config.precision,
        max_exact_bits=runner.settings.max_exact_bits,
    )
    assert [row["divergence_step"] for row in rows if row["k"] == 8] == [
        "" if r.divergence_step is None else r.divergence_step for r in expected
    ]


def test_diverge_rotation_is_censored(runner):
    result = runner.diverge(DivergeConfig(map="rotation(1/4)", k=[5], trials=3, horizon=100))
    assert result["summary"][0]["censored"] == 3
    assert result["summary"][0]["mean"] is None
    assert {row["divergence_step"] for row in result["rows"]} == {""}
