"""Configuration lattices for component, weighting and modality studies.

Each grid row is a set of dotted-key overrides on a base config. Every row is
trained once per seed on the same manifest and scored on its test split.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src.data.manifest import DatasetManifest
from src.errors import ConfigurationError
from src.experiment.config import ExperimentConfig
from src.metrics.evaluate import evaluate
from src.metrics.plots import plot_metric_bars
from src.metrics.segmentation import METRIC_NAMES
from src.model.network import ModelKind
from src.trainer.checkpoint import restore_model
from src.trainer.engine import fit
from src.trainer.reproducibility import resolve_device

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridRow:
    name: str
    values: dict[str, Any]


def _components(da: bool, pd: bool, dacl: bool, ts: bool) -> dict[str, Any]:
    return {
        "trainer.model_kind": ModelKind.MULTIMODAL.value,
        "trainer.ablation.da": da,
        "trainer.ablation.pd": pd,
        "trainer.ablation.dacl": dacl,
        "trainer.ablation.ts": ts,
    }


def _weights(alpha: float, beta: float, gamma: float, delta: float) -> dict[str, Any]:
    return {
        "disentangle.alpha": alpha,
        "disentangle.beta": beta,
        "disentangle.gamma": gamma,
        "disentangle.delta": delta,
    }


THIRD = 1.0 / 3.0

GRIDS: dict[str, list[GridRow]] = {
    # component ladder, each row adds one component
    "components": [
        GridRow("baseline", _components(False, False, False, False)),
        GridRow("+DA", _components(True, False, False, False)),
        GridRow("+DA+PD", _components(True, True, False, False)),
        GridRow("+DA+PD+DACL", _components(True, True, True, False)),
        GridRow("+TS", _components(True, True, True, True)),
    ],
    "weighting": [
        GridRow("1/1/1/1", _weights(1.0, 1.0, 1.0, 1.0)),
        GridRow("1/3,1/3,1/3/0.1", _weights(THIRD, THIRD, THIRD, 0.1)),
        GridRow("1/3,1/3,1/3/0.01", _weights(THIRD, THIRD, THIRD, 0.01)),
        GridRow("1/3,1/3,1/3/0.001", _weights(THIRD, THIRD, THIRD, 0.001)),
    ],
    "modality": [
        GridRow(kind.label, {"trainer.model_kind": kind.value})
        for kind in (ModelKind.WLI_ONLY, ModelKind.NBI_ONLY, ModelKind.MULTIMODAL)
    ],
}


def grid_rows(name: str) -> list[GridRow]:
    try:
        return GRIDS[name]
    except KeyError:
        raise ConfigurationError(f"Unknown ablation grid '{name}'; choose from {', '.join(GRIDS)}") from None


@dataclass
class AblationRow:
    name: str
    config_hash: str
    seeds: list[int]
    per_seed: list[dict[str, Optional[float]]] = field(default_factory=list)

    @property
    def means(self) -> dict[str, Optional[float]]:
        means: dict[str, Optional[float]] = {}
        for metric in METRIC_NAMES:
            values = [m[metric] for m in self.per_seed if m.get(metric) is not None]
            means[metric] = float(np.mean(values)) if values else None
        return means


@dataclass
class AblationTable:
    grid: str
    rows: list[AblationRow]

    def to_dict(self) -> dict:
        return {
            "grid": self.grid,
            "rows": [
                {"name": r.name, "config_hash": r.config_hash, "seeds": r.seeds, "per_seed": r.per_seed, "means": r.means}
                for r in self.rows
            ],
        }

    def save(self, out_dir: str | Path) -> dict[str, Path]:
        """Write ``ablation.json``, ``ablation.csv`` and ``ablation.png``."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        json_path = out_dir / "ablation.json"
        json_path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        csv_path = out_dir / "ablation.csv"
        with csv_path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=["row", "config_hash", "n_seeds", *METRIC_NAMES])
            writer.writeheader()
            for row in self.rows:
                writer.writerow({"row": row.name, "config_hash": row.config_hash, "n_seeds": len(row.seeds), **row.means})
        plot_path = plot_metric_bars(
            [r.means for r in self.rows], [r.name for r in self.rows], out_dir / "ablation.png", title=self.grid
        )
        return {"json": json_path, "csv": csv_path, "plot": plot_path}


def count_inversions(values: list[float], tolerance: float = 0.0) -> tuple[int, float]:
    """Number of decreases along a ladder and the largest one.

    Decreases no larger than ``tolerance`` are not counted.
    """
    drops = [prev - cur for prev, cur in zip(values, values[1:]) if prev - cur > tolerance]
    return len(drops), max(drops, default=0.0)


def run_grid(
    grid: str,
    base: ExperimentConfig,
    manifest: DatasetManifest,
    out_dir: str | Path,
    seeds: list[int],
) -> AblationTable:
    """Train and score every row of ``grid`` for each seed."""
    if not seeds:
        raise ConfigurationError("At least one seed is required")
    out_dir = Path(out_dir)
    test = manifest.split("test")
    rows: list[AblationRow] = []
    for row in grid_rows(grid):
        config = base.with_values(row.values)
        result = AblationRow(name=row.name, config_hash=config.config_hash(), seeds=list(seeds))
        for seed in seeds:
            seeded = config.with_values({"trainer.seed": seed})
            slug = "".join(c if c.isalnum() else "_" for c in row.name).strip("_") or "row"
            start = time.perf_counter()
            fitted = fit(manifest, seeded, out_dir / "runs" / f"{slug}_seed{seed}")
            device = resolve_device(seeded.trainer.device)
            model, _, _ = restore_model(fitted.checkpoint_path, device)
            report = evaluate(
                model,
                test,
                threshold=seeded.metrics.threshold,
                batch_size=seeded.metrics.eval_batch_size,
                device=device,
                config_hash=seeded.config_hash(),
                model_kind=seeded.trainer.model_kind,
            )
            result.per_seed.append(report.means)
            logger.info(
                "[INFO] %s / %s seed %d: dice=%.4f (%.1fs)",
                grid, row.name, seed, report.means["dice"] or 0.0, time.perf_counter() - start,
            )
        rows.append(result)
    return AblationTable(grid=grid, rows=rows)
