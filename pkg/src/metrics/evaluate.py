"""Dataset evaluation and report files."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Union

import numpy as np
import torch
from torch import nn

from src.data.batching import Batch, make_batches
from src.data.manifest import DatasetManifest
from src.errors import ManifestError
from src.metrics.segmentation import METRIC_NAMES, ConfusionCounts, confusion, metrics_from_counts
from src.trainer.losses import foreground_probability

logger = logging.getLogger(__name__)

ARGMAX = "argmax"


class SegmentationPredictor(Protocol):
    def predict_logits(self, batch: Batch) -> torch.Tensor: ...


class GroundTruthOracle:
    """Predictor whose logits reproduce the batch masks exactly."""

    margin = 10.0

    def predict_logits(self, batch: Batch) -> torch.Tensor:
        sign = batch.mask.float() * 2.0 - 1.0
        return torch.stack([-sign, sign], dim=1) * self.margin


@dataclass
class ImageScore:
    id: str
    label: str
    iou: float
    dice: float
    se: Optional[float]
    gmean: Optional[float]
    tp: int
    fp: int
    fn: int
    tn: int

    @classmethod
    def from_counts(cls, sample_id: str, label: str, counts: ConfusionCounts) -> "ImageScore":
        return cls(id=sample_id, label=label, **metrics_from_counts(counts), **asdict(counts))


@dataclass
class EvalReport:
    per_image: list[ImageScore]
    means: dict[str, Optional[float]]
    config_hash: str = ""
    model_kind: str = ""
    threshold: Union[str, float] = ARGMAX
    embedding_path: Optional[str] = None
    embedding_summary: Optional[dict[str, float]] = field(default=None)

    @property
    def n_images(self) -> int:
        return len(self.per_image)

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "model_kind": self.model_kind,
            "threshold": self.threshold,
            "n_images": self.n_images,
            "means": self.means,
            "per_image": [asdict(score) for score in self.per_image],
            "embedding_path": self.embedding_path,
            "embedding_summary": self.embedding_summary,
        }

    def save_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        return path

    def save_csv(self, path: str | Path) -> Path:
        """Per-image rows followed by a ``mean`` row."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        columns = [f.name for f in ImageScore.__dataclass_fields__.values()] + ["config_hash"]
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=columns)
            writer.writeheader()
            for score in self.per_image:
                writer.writerow({**asdict(score), "config_hash": self.config_hash})
            writer.writerow({"id": "mean", **self.means, "config_hash": self.config_hash})
        return path


def dataset_means(scores: list[ImageScore]) -> dict[str, Optional[float]]:
    """Mean of each metric over the images where it is defined."""
    means: dict[str, Optional[float]] = {}
    for name in METRIC_NAMES:
        values = [getattr(s, name) for s in scores if getattr(s, name) is not None]
        means[name] = float(np.mean(values)) if values else None
    return means


def binarize(logits: torch.Tensor, threshold: Union[str, float] = ARGMAX) -> torch.Tensor:
    if threshold == ARGMAX:
        if logits.shape[1] == 1:
            return logits[:, 0] > 0
        return logits.argmax(dim=1) == 1
    return foreground_probability(logits) > float(threshold)


@torch.no_grad()
def evaluate(
    model: SegmentationPredictor,
    manifest: DatasetManifest,
    threshold: Union[str, float] = ARGMAX,
    batch_size: int = 8,
    device: torch.device | str = "cpu",
    config_hash: str = "",
    model_kind: str = "",
) -> EvalReport:
    """Score every pair of ``manifest`` in manifest order.

    Raises:
        ManifestError: If the manifest is empty.
    """
    if len(manifest) == 0:
        raise ManifestError("Nothing to evaluate: the manifest has no pairs")

    start = time.perf_counter()
    was_training = isinstance(model, nn.Module) and model.training
    if isinstance(model, nn.Module):
        model.eval()
    labels = {pair.id: pair.label for pair in manifest}
    scores: list[ImageScore] = []
    try:
        for batch in make_batches(manifest, batch_size, train=False):
            batch = batch.to(device)
            pred = binarize(model.predict_logits(batch), threshold).cpu().numpy()
            gt = batch.mask.cpu().numpy()
            for i, sample_id in enumerate(batch.ids):
                scores.append(ImageScore.from_counts(sample_id, labels[sample_id], confusion(pred[i], gt[i])))
    finally:
        if was_training:
            model.train()

    report = EvalReport(
        per_image=scores,
        means=dataset_means(scores),
        config_hash=config_hash,
        model_kind=model_kind,
        threshold=threshold,
    )
    logger.info(
        "[INFO] Evaluated %d image(s) in %.2fs: %s",
        report.n_images,
        time.perf_counter() - start,
        ", ".join(f"{k}={v:.4f}" for k, v in report.means.items() if v is not None),
    )
    return report
