"""Dumps of the pooled shared/specific vectors and their cosine geometry."""

from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import torch
from torch import nn

from src.data.batching import make_batches
from src.data.manifest import DatasetManifest
from src.disentangle.losses import cosine
from src.errors import ContractError, ManifestError

logger = logging.getLogger(__name__)

ROLES = ("z_ws", "z_wp", "z_ns", "z_np")


@dataclass
class EmbeddingSummary:
    n_samples: int
    shared_cross_cos: float
    specific_cross_cos: float
    intra_w_abs_cos: float
    intra_n_abs_cos: float

    @property
    def intra_abs_cos(self) -> float:
        return 0.5 * (self.intra_w_abs_cos + self.intra_n_abs_cos)

    def to_dict(self) -> dict[str, float]:
        return {**asdict(self), "intra_abs_cos": self.intra_abs_cos}


@torch.no_grad()
def collect_embeddings(
    model: nn.Module,
    manifest: DatasetManifest,
    batch_size: int = 8,
    device: torch.device | str = "cpu",
) -> tuple[list[str], dict[str, torch.Tensor]]:
    """Pooled vectors of every pair in manifest order, model in eval mode."""
    if len(manifest) == 0:
        raise ManifestError("No pairs to embed")
    was_training = model.training
    model.eval()
    ids: list[str] = []
    chunks: dict[str, list[torch.Tensor]] = {role: [] for role in ROLES}
    try:
        for batch in make_batches(manifest, batch_size, train=False):
            batch = batch.to(device)
            output = model(batch.x_w, batch.x_n)
            if output.bundle is None:
                raise ContractError("Disentanglement diagnostics need the multimodal model")
            for role, vectors in output.bundle.pooled().items():
                chunks[role].append(vectors.detach().cpu())
            ids.extend(batch.ids)
    finally:
        model.train(was_training)
    return ids, {role: torch.cat(parts) for role, parts in chunks.items()}


def summarize(vectors: dict[str, torch.Tensor]) -> EmbeddingSummary:
    return EmbeddingSummary(
        n_samples=int(vectors["z_ws"].shape[0]),
        shared_cross_cos=float(cosine(vectors["z_ws"], vectors["z_ns"]).mean()),
        specific_cross_cos=float(cosine(vectors["z_wp"], vectors["z_np"]).mean()),
        intra_w_abs_cos=float(cosine(vectors["z_ws"], vectors["z_wp"]).abs().mean()),
        intra_n_abs_cos=float(cosine(vectors["z_ns"], vectors["z_np"]).abs().mean()),
    )


def write_embeddings(
    path: str | Path,
    ids: list[str],
    vectors: dict[str, torch.Tensor],
    labels: Optional[dict[str, str]] = None,
    config_hash: str = "",
) -> Path:
    """CSV with columns id, feature_role, label, config_hash, dim_0..dim_{D-1}; four rows per pair."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = labels or {}
    dim = vectors["z_ws"].shape[1]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "feature_role", "label", "config_hash", *(f"dim_{i}" for i in range(dim))])
        for index, sample_id in enumerate(ids):
            label = labels.get(sample_id, "")
            for role in ROLES:
                writer.writerow(
                    [sample_id, role, label, config_hash, *(repr(float(v)) for v in vectors[role][index])]
                )
    return path


def disentangle_diagnostics(
    model: nn.Module,
    manifest: DatasetManifest,
    out_path: Optional[str | Path] = None,
    batch_size: int = 8,
    device: torch.device | str = "cpu",
    config_hash: str = "",
) -> tuple[Optional[Path], EmbeddingSummary]:
    ids, vectors = collect_embeddings(model, manifest, batch_size, device)
    summary = summarize(vectors)
    path = None
    if out_path is not None:
        labels = {pair.id: pair.label for pair in manifest}
        path = write_embeddings(out_path, ids, vectors, labels, config_hash)
    logger.info(
        "[INFO] Embedding geometry over %d pair(s): shared cos=%.3f, |intra cos|=%.3f, specific cos=%.3f",
        summary.n_samples,
        summary.shared_cross_cos,
        summary.intra_abs_cos,
        summary.specific_cross_cos,
    )
    return path, summary
