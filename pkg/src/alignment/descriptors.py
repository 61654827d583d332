"""Multi-scale global descriptors: concatenation, average and attention pooling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import torch
from torch import nn

from src.encoder.types import TokenFeatureMap
from src.errors import ContractError


@dataclass
class MultiScaleFeature:
    """Stage maps concatenated on the last axis: (B, N, L·D)."""

    data: torch.Tensor
    modality: str
    num_stages: int


@dataclass
class GlobalDescriptor:
    avg: torch.Tensor  # (B, L·D)
    weighted: torch.Tensor  # (B, L·D)
    global_feature: torch.Tensor  # avg + weighted
    attention: torch.Tensor  # (B, N), rows sum to one


class AttentionScorer(nn.Module):
    """Token-level linear map L·D → 1 producing raw importance scores."""

    def __init__(self, feature_dim: int) -> None:
        super().__init__()
        self.proj = nn.Linear(feature_dim, 1)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        return self.proj(tokens).squeeze(-1)


def concat_multiscale(stage_maps: Sequence[TokenFeatureMap]) -> MultiScaleFeature:
    """Concatenate the L stage maps of one modality in stage order.

    Raises:
        ContractError: On an empty list, mixed modalities, or mismatched (B, N).
    """
    if not stage_maps:
        raise ContractError("concat_multiscale needs at least one stage map")
    modality = stage_maps[0].modality
    batch, tokens = stage_maps[0].data.shape[:2]
    for fmap in stage_maps:
        if fmap.data.ndim != 3:
            raise ContractError(f"Stage {fmap.stage}: expected (B, N, D), got {tuple(fmap.data.shape)}")
        if fmap.modality != modality:
            raise ContractError(f"Mixed modalities in stage maps: {modality} vs {fmap.modality}")
        if fmap.data.shape[:2] != (batch, tokens):
            raise ContractError(
                f"Stage {fmap.stage}: (B, N) = {tuple(fmap.data.shape[:2])} does not match {(batch, tokens)}"
            )
    data = torch.cat([fmap.data for fmap in stage_maps], dim=-1)
    return MultiScaleFeature(data=data, modality=modality, num_stages=len(stage_maps))


def global_average(f: MultiScaleFeature) -> torch.Tensor:
    return f.data.mean(dim=1)


def attention_pool(f: MultiScaleFeature, scorer: nn.Module) -> tuple[torch.Tensor, torch.Tensor]:
    """Softmax token scores over N and pool the tokens with them."""
    scores = scorer(f.data)
    attention = torch.softmax(scores, dim=1)
    weighted = torch.einsum("bn,bnd->bd", attention, f.data)
    return weighted, attention


def global_descriptor(f: MultiScaleFeature, scorer: nn.Module) -> GlobalDescriptor:
    avg = global_average(f)
    weighted, attention = attention_pool(f, scorer)
    return GlobalDescriptor(avg=avg, weighted=weighted, global_feature=avg + weighted, attention=attention)
