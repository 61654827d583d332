"""Loss-curve and metric-bar images."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from src.metrics.segmentation import METRIC_NAMES  # noqa: E402
from src.trainer.report import LossReport  # noqa: E402

CURVES = ("total", "ce", "dice", "da", "fd")


def plot_loss_curves(reports: list[LossReport], path: str | Path, title: str = "") -> Path:
    """Per-epoch loss terms on a log axis, λ2 on a twin axis."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    epochs = [r.epoch for r in reports]
    fig, ax = plt.subplots(figsize=(7, 4))
    for name in CURVES:
        values = [max(getattr(r, name), 1e-12) for r in reports]
        ax.plot(epochs, values, label=name)
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    twin = ax.twinx()
    twin.plot(epochs, [r.lambda2 for r in reports], color="black", linestyle="--", label="lambda2")
    twin.set_ylabel("lambda2")
    ax.legend(loc="upper right", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_metric_bars(
    rows: list[dict[str, Optional[float]]],
    labels: list[str],
    path: str | Path,
    title: str = "",
) -> Path:
    """Grouped bars of the four metrics, one group per configuration."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    width = 0.8 / len(METRIC_NAMES)
    fig, ax = plt.subplots(figsize=(max(6, 1.6 * len(labels)), 4))
    for k, name in enumerate(METRIC_NAMES):
        values = [row.get(name) or 0.0 for row in rows]
        ax.bar([i + k * width for i in range(len(rows))], values, width=width, label=name)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(rows))])
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylim(0, 1)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
