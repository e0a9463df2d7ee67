"""
Tests for the command line interface.
"""

import json

import pytest
from click.testing import CliRunner

from fiqsim import __version__
from fiqsim.main import cli
from fiqsim.tests.conftest import read_csv_rows


@pytest.fixture
def invoke(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in ("LOG_LEVEL", "LOG_FILE", "MIN_ENSEMBLE_SIZE", "MAX_WORKERS", "ALPHA"):
        monkeypatch.delenv(f"FIQSIM_{name}", raising=False)
    runner = CliRunner()

    def run(*args):
        return runner.invoke(cli, list(args))

    return run


def test_version(invoke):
    result = invoke("--version")
    assert result.exit_code == 0
    assert __version__ in result.output


def test_info_reports_information(invoke):
    result = invoke("info", "101*")
    assert result.exit_code == 0
    assert "I(x) = 3" in result.output
    assert "Possible values: [5/8, 3/4]" in result.output

    result = invoke("info", "?(1/4)*")
    assert result.exit_code == 0
    assert "I(x) = 0.188722" in result.output


def test_info_rejects_bad_literal(invoke):
    result = invoke("info", "10?(3/2)*")
    assert result.exit_code == 1
    assert "column 3" in result.output


def test_evolve_is_reproducible(invoke, tmp_path):
    for out in ("a", "b"):
        result = invoke("--seed", "42", "--out", out, "evolve", "--steps", "30")
        assert result.exit_code == 0, result.output
    for name in ("trajectory.csv", "manifest.json", "config.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    log = json.loads((tmp_path / "a" / "run_log.json").read_text())
    assert log["error"] is None
    assert "trajectory.csv" in log["files"]


def test_evolve_outputs(invoke, tmp_path):
    result = invoke("--seed", "3", "evolve", "--steps", "12")
    assert result.exit_code == 0, result.output
    csv = tmp_path / "results" / "trajectory.csv"
    assert csv.read_text().startswith("# config_sha256=")
    rows = read_csv_rows(csv)
    assert [row["step"] for row in rows] == [str(t) for t in range(1, 13)]
    assert rows[0]["actualized_positions"] == "1;2"

    manifest = json.loads((tmp_path / "results" / "manifest.json").read_text())
    assert manifest["manifest"]["seed"] == 3
    assert manifest["manifest"]["map"] == "doubling"
    assert manifest["summary"]["bits_emitted"] == 12
    assert manifest["summary"]["bits_consumed"] == 13
    assert manifest["provenance"]["version"] == __version__


def test_evolve_json_format(invoke, tmp_path):
    result = invoke("--format", "json", "evolve", "--steps", "5")
    assert result.exit_code == 0, result.output
    document = json.loads((tmp_path / "results" / "trajectory.json").read_text())
    assert len(document["steps"]) == 5


def test_tape_seeds_differ(invoke, tmp_path):
    invoke("--seed", "7", "--out", "s7", "evolve", "--model", "tape", "--steps", "64")
    invoke("--seed", "8", "--out", "s8", "evolve", "--model", "tape", "--steps", "64")
    seven = (tmp_path / "s7" / "trajectory.csv").read_text()
    eight = (tmp_path / "s8" / "trajectory.csv").read_text()
    assert seven.splitlines()[2:] != eight.splitlines()[2:]


def test_rotation_orbit_is_periodic(invoke, tmp_path):
    result = invoke("evolve", "--map", "rotation(1/4)", "--steps", "8", "--precision", "2")
    assert result.exit_code == 0, result.output
    emitted = [row["emitted_digits"] for row in read_csv_rows(tmp_path / "results" / "trajectory.csv")]
    assert emitted[:4] == emitted[4:]
    assert len(set(emitted)) == 4


def test_config_file_reproduces_run(invoke, tmp_path):
    first = invoke("--seed", "5", "--out", "first", "evolve", "--map", "tent", "--steps", "20")
    assert first.exit_code == 0, first.output
    second = invoke("--config", "first/config.json", "--out", "second", "evolve")
    assert second.exit_code == 0, second.output
    assert (tmp_path / "first" / "trajectory.csv").read_bytes() == \
        (tmp_path / "second" / "trajectory.csv").read_bytes()


@pytest.mark.parametrize("command, flags, files", [
    ("compare", ["--seeds", "5", "--length", "200", "--block-lengths", "1,2"],
     ["report.json", "summary.csv"]),
    ("qmeasure", ["--p", "1/3", "--p", "1/2", "--trials", "50"],
     ["outcomes.csv", "summary.json"]),
    ("diverge", ["--map", "tent", "--k", "4", "--k", "6", "--trials", "10"],
     ["divergence.csv", "summary.json"]),
])
def test_config_file_reproduces_every_experiment(invoke, tmp_path, monkeypatch,
                                                 command, flags, files):
    monkeypatch.setenv("FIQSIM_MIN_ENSEMBLE_SIZE", "5")
    first = invoke("--seed", "9", "--out", "first", command, *flags)
    assert first.exit_code == 0, first.output
    second = invoke("--config", "first/config.json", "--out", "second", command)
    assert second.exit_code == 0, second.output
    for name in files + ["config.json"]:
        assert (tmp_path / "first" / name).read_bytes() == \
            (tmp_path / "second" / name).read_bytes(), name


def test_config_file_errors(invoke, tmp_path):
    (tmp_path / "bad.json").write_text("[1, 2]")
    assert invoke("--config", "bad.json", "evolve").exit_code == 1
    (tmp_path / "extra.json").write_text(json.dumps({"stepz": 3}))
    result = invoke("--config", "extra.json", "evolve")
    assert result.exit_code == 1
    assert "stepz" in result.output


def test_budget_exhaustion_exits_with_runtime_code(invoke, tmp_path):
    result = invoke("evolve", "--budget", "1")
    assert result.exit_code == 2
    assert "Runtime error" in result.output
    log = json.loads((tmp_path / "results" / "run_log.json").read_text())
    assert log["error"]["error_type"] == "BudgetExhaustedError"
    assert log["error"]["details"]["step"] == 1


def test_invalid_flag_value_exits_with_validation_code(invoke):
    result = invoke("evolve", "--initial", "1x")
    assert result.exit_code == 1
    assert "initial" in result.output


def test_diverge_writes_rows(invoke, tmp_path):
    result = invoke("diverge", "--k", "5", "--trials", "10")
    assert result.exit_code == 0, result.output
    rows = read_csv_rows(tmp_path / "results" / "divergence.csv")
    assert len(rows) == 10
    assert {row["divergence_step"] for row in rows} == {"5"}
    assert {row["censored"] for row in rows} == {"false"}
    summary = json.loads((tmp_path / "results" / "summary.json").read_text())
    assert summary["summary"][0]["mean"] == 5.0


def test_qmeasure_certain_outcomes(invoke, tmp_path):
    result = invoke("qmeasure", "--p", "1", "--p", "0", "--trials", "10")
    assert result.exit_code == 0, result.output
    rows = read_csv_rows(tmp_path / "results" / "outcomes.csv")
    assert list(rows[0]) == ["trial", "step", "outcome"]
    assert len(rows) == 20
    assert [(row["trial"], row["step"]) for row in rows[:4]] == [
        ("0", "1"), ("0", "2"), ("1", "1"), ("1", "2"),
    ]
    assert {row["outcome"] for row in rows if row["step"] == "1"} == {"1"}
    assert {row["outcome"] for row in rows if row["step"] == "2"} == {"-1"}
    summary = json.loads((tmp_path / "results" / "summary.json").read_text())
    assert summary["comparison_limit_bits"] == 256


def test_qmeasure_rejects_non_projector(invoke, tmp_path):
    config = {
        "sequence": [{
            "state": [[1.0, 0.0], [0.0, 0.0]],
            "projector": [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
        }],
    }
    (tmp_path / "q.json").write_text(json.dumps(config))
    result = invoke("--config", "q.json", "qmeasure")
    assert result.exit_code == 1
    assert "idempotent" in result.output


def test_compare_rejects_small_ensemble(invoke):
    result = invoke("compare", "--seeds", "3", "--length", "200")
    assert result.exit_code == 1
    assert "ensemble too small" in result.output


def test_compare_writes_report(invoke, tmp_path, monkeypatch):
    monkeypatch.setenv("FIQSIM_MIN_ENSEMBLE_SIZE", "5")
    result = invoke("compare", "--seeds", "5", "--length", "200", "--block-lengths", "1,2")
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "results" / "report.json").read_text())
    assert report["seeds"] == {"fiq": [0, 4], "tape": [5, 9]}
    assert "note" in report
    rows = read_csv_rows(tmp_path / "results" / "summary.csv")
    assert [row["test"] for row in rows[:2]] == ["two_sample_equivalence"] * 2
    assert "fiq/monobit" in {row["test"] for row in rows}


def test_schema(invoke):
    result = invoke("schema", "diverge")
    assert result.exit_code == 0
    assert "tail_bits" in result.output
