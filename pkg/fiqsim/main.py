#!/usr/bin/env python3
"""
FIQ Simulation Toolkit - Command Line Interface
===============================================

Subcommands:
- info:     information content and per-bit breakdown of a Fiq literal
- evolve:   one trajectory under the fiq or tape model
- compare:  fiq-model ensemble against tape-model ensemble
- qmeasure: repeated binary measurements driven by hidden variables
- diverge:  divergence times of inputs differing far down
- schema:   JSON schema of a subcommand's config

Every run writes its effective config.json next to the outputs; re-running
with --config <out>/config.json reproduces the payloads byte for byte.
"""

import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click
import pydantic
import structlog
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from . import __version__
from .config import CONFIG_MODELS, RunConfig, Settings
from .core.error_handler import EXIT_VALIDATION, ErrorContext, error_handler
from .core.fiq import Determined, information_content, state_interval
from .core.literal import parse_fiq
from .core.numbers import bit_information
from .exceptions import FiqSimError
from .experiments import ExperimentRunner
from .utils import setup_logging, write_csv, write_json, write_run_log

console = Console()
logger = structlog.get_logger(__name__)

TRAJECTORY_HEADER = ["step", "emitted_digits", "actualized_positions", "interval_width"]
SUMMARY_HEADER = ["test", "k", "statistic", "p_value", "verdict"]
OUTCOME_HEADER = ["trial", "step", "outcome"]
DIVERGENCE_HEADER = ["k", "trial", "divergence_step", "censored"]


def _fraction(q) -> str:
    return f"{q.numerator}/{q.denominator}"


def _load_config(ctx: click.Context, command: str, overrides: Dict[str, Any]) -> RunConfig:
    """Config file, then CLI flags, then the global --seed"""
    data: Dict[str, Any] = {}
    config_path: Optional[str] = ctx.obj["config_path"]
    if config_path:
        try:
            data = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            console.print(f"[red]Configuration error: cannot read {config_path}: {e}[/red]")
            sys.exit(EXIT_VALIDATION)
        if not isinstance(data, dict):
            console.print(f"[red]Configuration error: {config_path} is not a JSON object[/red]")
            sys.exit(EXIT_VALIDATION)
    data.update({k: v for k, v in overrides.items() if v is not None})
    if ctx.obj["seed"] is not None:
        data["seed"] = ctx.obj["seed"]
    try:
        return CONFIG_MODELS[command](**data)
    except pydantic.ValidationError as e:
        console.print(f"[red]Validation error in {command} config:[/red]")
        for err in e.errors():
            where = ".".join(str(part) for part in err["loc"]) or command
            console.print(f"  [red]{where}: {err['msg']}[/red]")
        sys.exit(EXIT_VALIDATION)


def _execute(ctx: click.Context, command: str, config: RunConfig,
             body: Callable[[ExperimentRunner, Path], List[Path]]) -> None:
    """Run one experiment, persisting config, outputs and run log under --out"""
    settings: Settings = ctx.obj["settings"]
    out_dir = Path(ctx.obj["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc)

    config_file = out_dir / "config.json"
    config_file.write_text(json.dumps(config.payload(), indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        console=console,
        transient=True,
    ) as progress:
        tasks: Dict[str, Any] = {}

        def on_progress(stage: str, done: int, total: int) -> None:
            if stage not in tasks:
                tasks[stage] = progress.add_task(f"{command}: {stage}", total=total)
            progress.update(tasks[stage], completed=done)

        runner = ExperimentRunner(settings, progress_callback=on_progress)
        try:
            files = body(runner, out_dir)
        except Exception as e:
            context = ErrorContext(
                operation=command,
                component="cli",
                seed=config.seed,
                step=getattr(e, "details", {}).get("step"),
                trial=getattr(e, "details", {}).get("trial"),
            )
            code = error_handler.handle_error(e, context)
            payload = e.to_dict() if isinstance(e, FiqSimError) else {"error": str(e)}
            write_run_log(out_dir, command, config, started, [config_file], error=payload)
            progress.stop()
            label = "Validation error" if code == EXIT_VALIDATION else "Runtime error"
            console.print(f"[red]{label}: {e}[/red]")
            sys.exit(code)

    write_run_log(out_dir, command, config, started, [config_file, *files])
    logger.info("run_finished", command=command, seed=config.seed,
                files=[path.name for path in files])
    for path in files:
        console.print(f"[green]✓ Wrote {path}[/green]")


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help="JSON config file for the subcommand")
@click.option("--seed", type=click.IntRange(0, (1 << 64) - 1), help="Base seed (u64)")
@click.option("--out", default="results", show_default=True, help="Output directory")
@click.option("--format", "output_format", default="csv", show_default=True,
              type=click.Choice(["csv", "json"]), help="Bulk output format for evolve")
@click.option("--log-level", default=None,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]),
              help="Logging level (overrides FIQSIM_LOG_LEVEL)")
@click.version_option(__version__, prog_name="fiqsim")
@click.pass_context
def cli(ctx, config_path, seed, out, output_format, log_level):
    """Finite Information Quantity simulation toolkit"""
    ctx.ensure_object(dict)

    try:
        settings = Settings()
        if log_level:
            settings.log_level = log_level
    except Exception as e:
        console.print(f"[red]Configuration error: {e}[/red]")
        sys.exit(EXIT_VALIDATION)

    setup_logging(settings)
    ctx.obj.update({
        "settings": settings,
        "config_path": config_path,
        "seed": seed,
        "out": out,
        "format": output_format,
    })


@cli.command()
@click.argument("literal")
def info(literal):
    """Information content of a Fiq literal such as '10?(1/4)*'"""
    try:
        x = parse_fiq(literal)
    except FiqSimError as e:
        console.print(f"[red]Parse error: {e.message}[/red]")
        sys.exit(EXIT_VALIDATION)

    table = Table(title=f"Fiq {literal}")
    table.add_column("Position", justify="right", style="cyan")
    table.add_column("State")
    table.add_column("Propensity", justify="right")
    table.add_column("1 - h(q)", justify="right")
    for n, state in x.states():
        if isinstance(state, Determined):
            table.add_row(str(n), "determined", str(state.bit), "1")
        else:
            q = state.propensity.value
            table.add_row(str(n), "undetermined", _fraction(q), f"{bit_information(q):.6g}")
    table.add_row("…", "tail", "1/2", "0")
    console.print(table)
    console.print(f"I(x) = {information_content(x):.6g}")
    console.print(f"Possible values: {state_interval(x).closure()}")


@cli.command()
@click.option("--map", "map_name", help="doubling | tent | logistic4 | baker | rotation(p/q)")
@click.option("--initial", help="Fiq literal of the initial condition")
@click.option("--initial-y", help="Fiq literal of the baker y-coordinate")
@click.option("--model", type=click.Choice(["fiq", "tape"]))
@click.option("--steps", type=int)
@click.option("--precision", type=int, help="Output bits per step")
@click.option("--budget", type=int, help="Actualizations allowed per step")
@click.option("--policy", type=click.Choice(["independent", "correlated"]))
@click.option("--correlation", help="Repeat probability 'num/den' for the correlated policy")
@click.option("--lane", type=int)
@click.pass_context
def evolve(ctx, map_name, initial, initial_y, model, steps, precision, budget, policy,
           correlation, lane):
    """Evolve one trajectory and write it with its manifest"""
    config = _load_config(ctx, "evolve", {
        "map": map_name, "initial": initial, "initial_y": initial_y, "model": model,
        "steps": steps, "precision": precision, "budget": budget, "policy": policy,
        "correlation": correlation, "lane": lane,
    })
    output_format = ctx.obj["format"]

    def body(runner: ExperimentRunner, out_dir: Path) -> List[Path]:
        trajectory = runner.evolve(config)
        if output_format == "json":
            data = write_json(out_dir / "trajectory.json",
                              {"steps": trajectory.to_dict()["steps"]}, config)
        else:
            data = write_csv(out_dir / "trajectory.csv", TRAJECTORY_HEADER,
                             (record.to_row() for record in trajectory.steps), config)
        summary = {
            "bits_emitted": len(trajectory.emitted_stream()),
            "bits_consumed": trajectory.bits_consumed,
        }
        if config.model == "fiq":
            summary["final_information"] = trajectory.final_information
        manifest = write_json(out_dir / "manifest.json",
                              {"manifest": trajectory.manifest, "summary": summary}, config)

        console.print(f"Emitted: {trajectory.emitted_stream()[:64]}"
                      f"{'…' if summary['bits_emitted'] > 64 else ''}")
        console.print(f"Bits emitted: {summary['bits_emitted']}")
        console.print(f"Bits consumed: {summary['bits_consumed']}")
        if "final_information" in summary:
            console.print(f"Final I(x): {summary['final_information']:.6g}")
        return [data, manifest]

    _execute(ctx, "evolve", config, body)


def _block_lengths(value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


@cli.command()
@click.option("--map", "map_name")
@click.option("--seeds", type=int, help="Ensemble size per model")
@click.option("--length", type=int, help="Emitted bits per stream")
@click.option("--precision", type=int)
@click.option("--budget", type=int)
@click.option("--block-lengths", help="Comma-separated block lengths, e.g. 1,2,3,4")
@click.option("--lag", type=int)
@click.option("--max-k", type=int)
@click.option("--alpha", type=float)
@click.option("--fiq-bias", help="Test hook: propensity 'num/den' on every fiq-side input bit")
@click.pass_context
def compare(ctx, map_name, seeds, length, precision, budget, block_lengths, lag, max_k,
            alpha, fiq_bias):
    """Compare fiq-model and tape-model ensembles"""
    config = _load_config(ctx, "compare", {
        "map": map_name, "seeds": seeds, "length": length, "precision": precision,
        "budget": budget, "block_lengths": _block_lengths(block_lengths), "lag": lag,
        "max_k": max_k, "alpha": alpha, "fiq_bias": fiq_bias,
    })

    def body(runner: ExperimentRunner, out_dir: Path) -> List[Path]:
        result = runner.compare(config)
        report = dict(result)
        report["equivalence"] = [r.to_dict() for r in result["equivalence"]]
        report["battery"] = {
            model: [r.to_dict() for r in reports]
            for model, reports in result["battery"].items()
        }
        rows = [r.summary_row() for r in result["equivalence"]]
        for model, reports in result["battery"].items():
            for r in reports:
                row = r.summary_row()
                row["test"] = f"{model}/{row['test']}"
                rows.append(row)

        table = Table(title=f"compare {config.map}: {config.seeds} seeds per model")
        for column in SUMMARY_HEADER:
            table.add_column(column)
        for row in rows:
            table.add_row(*(row[c] for c in SUMMARY_HEADER))
        console.print(table)
        colour = "green" if result["verdict"].startswith("indistinguishable") else "yellow"
        console.print(f"[bold {colour}]Verdict: {result['verdict']}[/bold {colour}]")
        console.print(f"[dim]{result['note']}[/dim]")

        return [
            write_json(out_dir / "report.json", report, config),
            write_csv(out_dir / "summary.csv", SUMMARY_HEADER, rows, config),
        ]

    _execute(ctx, "compare", config, body)


@cli.command()
@click.option("--p", "probabilities", multiple=True,
              help="Outcome probability 'num/den'; repeat for a sequence")
@click.option("--trials", type=int)
@click.option("--limit", type=int, help="Comparison prefix limit in bits")
@click.pass_context
def qmeasure(ctx, probabilities, trials, limit):
    """Repeated binary measurements driven by uniform hidden variables"""
    config = _load_config(ctx, "qmeasure", {
        "sequence": list(probabilities) or None, "trials": trials, "limit": limit,
    })

    def body(runner: ExperimentRunner, out_dir: Path) -> List[Path]:
        result = runner.qmeasure(config)
        rows = (
            {"trial": trial, "step": step, "outcome": int(outcome)}
            for trial, row in enumerate(result["outcomes"])
            for step, outcome in enumerate(row, start=1)
        )
        steps = []
        table = Table(title=f"qmeasure: {config.trials} trials")
        for column in ("step", "p", "frequency", "verdict"):
            table.add_column(column)
        for entry in result["steps"]:
            report = entry["report"]
            steps.append({**entry, "report": report.to_dict()})
            table.add_row(str(entry["step"]), entry["p"], f"{entry['frequency']:.6f}",
                          report.verdict)
        console.print(table)
        return [
            write_csv(out_dir / "outcomes.csv", OUTCOME_HEADER, rows, config),
            write_json(out_dir / "summary.json",
                       {"steps": steps, "comparison_limit_bits": result["limit"]}, config),
        ]

    _execute(ctx, "qmeasure", config, body)


@cli.command()
@click.option("--map", "map_name")
@click.option("--k", "ks", type=int, multiple=True, help="Agreement depth; repeat for several")
@click.option("--trials", type=int)
@click.option("--horizon", type=int)
@click.option("--tail-bits", type=int)
@click.option("--precision", type=int)
@click.pass_context
def diverge(ctx, map_name, ks, trials, horizon, tail_bits, precision):
    """Divergence times of inputs that first differ at bit k+1"""
    config = _load_config(ctx, "diverge", {
        "map": map_name, "k": list(ks) or None, "trials": trials, "horizon": horizon,
        "tail_bits": tail_bits, "precision": precision,
    })

    def body(runner: ExperimentRunner, out_dir: Path) -> List[Path]:
        result = runner.diverge(config)
        table = Table(title=f"diverge {config.map}")
        for column in ("k", "mean", "min", "max", "censored"):
            table.add_column(column, justify="right")
        for entry in result["summary"]:
            mean = "-" if entry["mean"] is None else f"{entry['mean']:.3f}"
            table.add_row(str(entry["k"]), mean, str(entry["min"] or "-"),
                          str(entry["max"] or "-"), f"{entry['censored']}/{entry['trials']}")
        console.print(table)
        return [
            write_csv(out_dir / "divergence.csv", DIVERGENCE_HEADER, result["rows"], config),
            write_json(out_dir / "summary.json", {"summary": result["summary"]}, config),
        ]

    _execute(ctx, "diverge", config, body)


@cli.command()
@click.argument("command", type=click.Choice(sorted(CONFIG_MODELS)))
def schema(command):
    """Print the JSON schema of a subcommand's config"""
    console.print_json(data=CONFIG_MODELS[command].model_json_schema())


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
