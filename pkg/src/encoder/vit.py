"""Compact ViT-style patch encoder with shallow-stage taps."""

from __future__ import annotations

import torch
from torch import nn

from src.encoder.config import EncoderConfig
from src.encoder.types import DeepFeatureMap, EncoderOutput, TokenFeatureMap
from src.errors import ContractError


class PatchTokenEncoder(nn.Module):
    """Patch embedding plus a stack of pre-norm transformer blocks.

    Every block keeps the token count N, so the first L block outputs are
    tapped directly as shallow stages without resampling.
    """

    def __init__(self, config: EncoderConfig) -> None:
        super().__init__()
        config.validate()
        self.config = config
        self.patch_embed = nn.Conv2d(
            config.in_channels, config.embed_dim, kernel_size=config.patch_size, stride=config.patch_size
        )
        self.pos_embed = nn.Parameter(torch.zeros(1, config.num_tokens, config.embed_dim))
        nn.init.trunc_normal_(self.pos_embed, std=0.02)
        self.blocks = nn.ModuleList(
            nn.TransformerEncoderLayer(
                d_model=config.embed_dim,
                nhead=config.num_heads,
                dim_feedforward=int(config.embed_dim * config.mlp_ratio),
                dropout=config.dropout,
                activation="gelu",
                batch_first=True,
                norm_first=True,
            )
            for _ in range(config.depth)
        )
        self.norm = nn.LayerNorm(config.embed_dim)

    def forward(self, x: torch.Tensor) -> tuple[list[torch.Tensor], torch.Tensor]:
        """Return the first L block outputs and the normalised last one."""
        tokens = self.patch_embed(x).flatten(2).transpose(1, 2)
        tokens = tokens + self.pos_embed
        stages: list[torch.Tensor] = []
        for i, block in enumerate(self.blocks):
            tokens = block(tokens)
            if i < self.config.num_stages:
                stages.append(tokens)
        return stages, self.norm(tokens)


class TwoBranchEncoder(nn.Module):
    """One encoder per modality; ``shared_weights`` reuses a single branch."""

    def __init__(self, config: EncoderConfig) -> None:
        super().__init__()
        self.config = config
        self.branch_w = PatchTokenEncoder(config)
        self.branch_n = self.branch_w if config.shared_weights else PatchTokenEncoder(config)

    def forward(self, x_w: torch.Tensor, x_n: torch.Tensor) -> EncoderOutput:
        return encode(x_w, x_n, self)


def encode(x_w: torch.Tensor, x_n: torch.Tensor, encoder: TwoBranchEncoder) -> EncoderOutput:
    """Run both branches and wrap their taps.

    Raises:
        ContractError: If the inputs are not (B, C, H, W) with equal B.
    """
    if x_w.ndim != 4 or x_n.ndim != 4:
        raise ContractError(f"Expected (B, C, H, W) inputs, got {tuple(x_w.shape)} and {tuple(x_n.shape)}")
    if x_w.shape[0] != x_n.shape[0]:
        raise ContractError(f"Batch sizes differ between modalities: {x_w.shape[0]} vs {x_n.shape[0]}")
    if x_w.shape[0] < 1:
        raise ContractError("Empty batch")

    stages_w, deep_w = encoder.branch_w(x_w)
    stages_n, deep_n = encoder.branch_n(x_n)
    return EncoderOutput(
        stages_w=[TokenFeatureMap(t, stage=i + 1, modality="w") for i, t in enumerate(stages_w)],
        stages_n=[TokenFeatureMap(t, stage=i + 1, modality="n") for i, t in enumerate(stages_n)],
        deep_w=DeepFeatureMap(deep_w, modality="w"),
        deep_n=DeepFeatureMap(deep_n, modality="n"),
    )
