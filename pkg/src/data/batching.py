"""Torch dataset wrapper and deterministic batch iteration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import torch
from torch.utils.data import DataLoader, Dataset

from src.data.manifest import DatasetManifest
from src.errors import ConfigurationError


@dataclass
class Batch:
    """Images as (B, C, H, W) float tensors, masks as (B, H, W) long tensors."""

    x_w: torch.Tensor
    x_n: torch.Tensor
    mask: torch.Tensor
    ids: list[str]

    def __len__(self) -> int:
        return len(self.ids)

    def to(self, device: torch.device | str) -> "Batch":
        return Batch(self.x_w.to(device), self.x_n.to(device), self.mask.to(device), self.ids)


class PairDataset(Dataset):
    """Read-only view of a manifest as channel-first tensors."""

    def __init__(self, manifest: DatasetManifest) -> None:
        self._pairs = list(manifest.pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __getitem__(self, index: int) -> dict:
        pair = self._pairs[index]
        return {
            "x_w": torch.from_numpy(pair.x_w).permute(2, 0, 1).contiguous(),
            "x_n": torch.from_numpy(pair.x_n).permute(2, 0, 1).contiguous(),
            "mask": torch.from_numpy(pair.mask.astype("int64")),
            "id": pair.id,
        }


def make_batches(
    manifest: DatasetManifest,
    batch_size: int,
    shuffle_seed: int = 0,
    train: bool = True,
) -> Iterator[Batch]:
    """Iterate over ``manifest`` in batches.

    Training mode shuffles with a generator seeded by ``shuffle_seed`` and
    drops the final short batch; eval mode keeps manifest order and the
    short batch.

    Raises:
        ConfigurationError: If ``batch_size`` < 2 in training mode (MMD and
            the contrastive loss need at least two samples) or < 1 otherwise.
    """
    if train and batch_size < 2:
        raise ConfigurationError(f"Training batch_size must be >= 2, got {batch_size}")
    if batch_size < 1:
        raise ConfigurationError(f"batch_size must be >= 1, got {batch_size}")

    generator = torch.Generator().manual_seed(shuffle_seed)
    loader = DataLoader(
        PairDataset(manifest),
        batch_size=batch_size,
        shuffle=train,
        drop_last=train,
        generator=generator,
        num_workers=0,
    )
    for item in loader:
        yield Batch(x_w=item["x_w"], x_n=item["x_n"], mask=item["mask"], ids=list(item["id"]))
