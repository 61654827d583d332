"""Typer application: synth-data, train, runs, eval, ablate, losscheck."""

from __future__ import annotations

import json
import logging
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path
from typing import Iterator, Optional

import typer

from src.data.manifest import DatasetManifest
from src.data.storage import load_directory, save_directory
from src.data.synthetic import synthesize_dataset
from src.diagnostics.losscheck import run_loss_checks
from src.errors import AdfError, ConfigurationError
from src.experiment.ablation import run_grid
from src.experiment.config import ExperimentConfig
from src.experiment.runs import RunManager
from src.metrics.embeddings import disentangle_diagnostics
from src.metrics.evaluate import EvalReport, GroundTruthOracle, evaluate
from src.metrics.plots import plot_loss_curves, plot_metric_bars
from src.model.network import ModelKind
from src.trainer.checkpoint import restore_model
from src.trainer.engine import fit
from src.trainer.report import epoch_reports
from src.trainer.reproducibility import resolve_device

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_FAILURE = 1

app = typer.Typer(add_completion=False, help="Align-disentangle-fuse segmentation of paired endoscopy images.")

CONFIG_OPTION = typer.Option(None, "--config", "-c", help="Experiment YAML; built-in defaults when omitted")
SET_OPTION = typer.Option(None, "--set", help="Override a config key: section.key=value (repeatable)")
DATA_OPTION = typer.Option(None, "--data", help="Dataset directory; synthesised from the config when omitted")


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log per-step detail")) -> None:
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


@contextmanager
def _errors_to_exit_codes() -> Iterator[None]:
    try:
        yield
    except ConfigurationError as exc:
        typer.echo(f"Configuration error: {exc}", err=True)
        raise typer.Exit(EXIT_CONFIG) from exc
    except AdfError as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(EXIT_FAILURE) from exc


def _load_config(path: Optional[Path], overrides: Optional[list[str]]) -> ExperimentConfig:
    config = ExperimentConfig.load(path) if path is not None else ExperimentConfig.from_dict({})
    return config.with_overrides(overrides or [])


def _load_manifest(config: ExperimentConfig, data: Optional[Path]) -> DatasetManifest:
    root = data or (Path(config.data.root) if config.data.root else None)
    if root is not None:
        size = config.encoder.image_size
        return load_directory(root, resize=(size, size), channels=config.encoder.in_channels)
    return synthesize_dataset(config.data.n_pairs, config.data.seed, config.data.generator)


def _print_statistics(manifest: DatasetManifest) -> None:
    stats = manifest.statistics()
    typer.echo(f"{'split':<8}{'benign':>8}{'tumor':>8}{'total':>8}")
    for split, counts in stats.items():
        typer.echo(f"{split:<8}{counts.get('benign', 0):>8}{counts.get('tumor', 0):>8}{sum(counts.values()):>8}")


def _print_means(report: EvalReport) -> None:
    for name, value in report.means.items():
        typer.echo(f"{name:<6} {'n/a' if value is None else f'{value:.4f}'}")


@app.command("synth-data")
def synth_data(
    out: Path = typer.Option(..., "--out", "-o", help="Destination dataset directory"),
    config_path: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[list[str]] = SET_OPTION,
) -> None:
    """Generate a synthetic paired dataset with planted factors."""
    with _errors_to_exit_codes():
        config = _load_config(config_path, overrides)
        manifest = synthesize_dataset(config.data.n_pairs, config.data.seed, config.data.generator)
        save_directory(manifest, out, config_hash=config.config_hash())
        config.save(out / "config.yaml")
        _print_statistics(manifest)
        typer.echo(f"Wrote {len(manifest)} pair(s) to {out} (config {config.config_hash()})")


@app.command()
def train(
    config_path: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[list[str]] = SET_OPTION,
    data: Optional[Path] = DATA_OPTION,
    run_name: Optional[str] = typer.Option(None, "--run-name", help="Run folder name; defaults to the config hash"),
    output_dir: Optional[Path] = typer.Option(None, "--output-dir", help="Parent of run folders (ADF_OUTPUT_DIR)"),
    resume: Optional[Path] = typer.Option(None, "--resume", help="Checkpoint to resume from"),
) -> None:
    """Train a model and write checkpoints, the training log and loss curves."""
    with _errors_to_exit_codes():
        config = _load_config(config_path, overrides)
        manifest = _load_manifest(config, data)
        manager = RunManager(output_dir)
        name = run_name or f"{config.trainer.model_kind}_{config.config_hash()}"
        result = fit(manifest, config, manager.folder_for(name), resume_from=resume)
        plot_loss_curves(epoch_reports(result.log_path), result.run.plots_dir / "loss_curves.png", title=name)
        typer.echo(f"Checkpoint: {result.checkpoint_path}")
        typer.echo(f"Training log: {result.log_path}")


@app.command()
def runs(
    output_dir: Optional[Path] = typer.Option(None, "--output-dir", help="Parent of run folders (ADF_OUTPUT_DIR)"),
) -> None:
    """List training runs, most recently updated first."""
    with _errors_to_exit_codes():
        found = RunManager(output_dir).list_runs()
        if not found:
            typer.echo("No runs found")
        for run in found:
            typer.echo(
                f"{run.name:<32}{run.status.label:<10}{run.epochs_completed:>5}/{run.epochs_total:<5}"
                f"{run.progress_pct:>6.0%}  {run.config_hash or '-'}"
            )


@app.command("eval")
def eval_command(
    checkpoint: Optional[Path] = typer.Option(None, "--checkpoint", help="Checkpoint written by train"),
    data: Optional[Path] = DATA_OPTION,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Report directory"),
    oracle: bool = typer.Option(False, "--oracle", help="Score the ground-truth oracle instead of a checkpoint"),
    device_name: str = typer.Option("cpu", "--device", help="cpu | cuda | auto"),
    config_path: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[list[str]] = SET_OPTION,
) -> None:
    """Score a checkpoint on the test split; writes eval.json, eval.csv and embeddings."""
    with _errors_to_exit_codes():
        if oracle:
            config = _load_config(config_path, overrides)
            model, device, kind = GroundTruthOracle(), "cpu", "oracle"
        else:
            if checkpoint is None:
                raise ConfigurationError("eval needs --checkpoint (or --oracle)")
            device = resolve_device(device_name)
            model, config, _ = restore_model(checkpoint, device)
            kind = config.trainer.model_kind
        out = out or (checkpoint.parent.parent / "eval" if checkpoint is not None else Path("eval"))

        test = _load_manifest(config, data).split("test")
        report = evaluate(
            model,
            test,
            threshold=config.metrics.threshold,
            batch_size=config.metrics.eval_batch_size,
            device=device,
            config_hash=config.config_hash(),
            model_kind=kind,
        )
        if not oracle and kind == ModelKind.MULTIMODAL.value and config.metrics.dump_embeddings:
            path, summary = disentangle_diagnostics(
                model, test, out / "embeddings.csv", config.metrics.eval_batch_size, device, config.config_hash()
            )
            report.embedding_path = str(path)
            report.embedding_summary = summary.to_dict()
        report.save_json(out / "eval.json")
        report.save_csv(out / "eval.csv")
        plot_metric_bars([report.means], [kind], out / "metrics.png")
        _print_means(report)
        typer.echo(f"Report: {out / 'eval.json'}")


@app.command()
def ablate(
    grid: str = typer.Option("components", "--grid", help="components | weighting | modality"),
    seeds: str = typer.Option("0,1,2", "--seeds", help="Comma-separated training seeds"),
    out: Path = typer.Option(Path("ablation"), "--out", "-o", help="Output directory"),
    config_path: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[list[str]] = SET_OPTION,
    data: Optional[Path] = DATA_OPTION,
) -> None:
    """Train and score every row of a configuration lattice."""
    with _errors_to_exit_codes():
        try:
            seed_list = [int(s) for s in seeds.split(",") if s.strip()]
        except ValueError:
            raise ConfigurationError(f"--seeds must be comma-separated integers, got '{seeds}'") from None
        config = _load_config(config_path, overrides)
        manifest = _load_manifest(config, data)
        table = run_grid(grid, config, manifest, out, seed_list)
        paths = table.save(out)
        typer.echo(f"{'row':<22}{'iou':>8}{'dice':>8}{'se':>8}{'gmean':>8}")
        for row in table.rows:
            cells = "".join(f"{'n/a' if v is None else f'{v:.4f}':>8}" for v in row.means.values())
            typer.echo(f"{row.name:<22}{cells}")
        typer.echo(f"Table: {paths['csv']}")


@app.command()
def losscheck(
    trials: int = typer.Option(20, "--trials", help="Random cases per oracle comparison"),
    seed: int = typer.Option(0, "--seed"),
    as_json: bool = typer.Option(False, "--json", help="Print results as JSON"),
) -> None:
    """Compare every loss and metric with its explicit-loop oracle and gradient check."""
    results = run_loss_checks(trials=trials, seed=seed)
    if as_json:
        typer.echo(json.dumps([asdict(r) for r in results], indent=2))
    else:
        for result in results:
            prefix = "[PASS]" if result.passed else "[FAIL]"
            typer.echo(f"{prefix} {result.id:<20} {result.title} ({result.details})")
    failed = [r for r in results if not r.passed]
    typer.echo(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        raise typer.Exit(EXIT_FAILURE)
