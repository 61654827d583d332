"""Feature containers flowing out of the encoder."""

from __future__ import annotations

from dataclasses import dataclass

import torch

MODALITIES = ("w", "n")


@dataclass
class TokenFeatureMap:
    """Shallow-stage token grid of shape (B, N, D)."""

    data: torch.Tensor
    stage: int
    modality: str


@dataclass
class DeepFeatureMap:
    """Last encoded token grid of shape (B, N, D)."""

    data: torch.Tensor
    modality: str


@dataclass
class EncoderOutput:
    stages_w: list[TokenFeatureMap]
    stages_n: list[TokenFeatureMap]
    deep_w: DeepFeatureMap
    deep_n: DeepFeatureMap
