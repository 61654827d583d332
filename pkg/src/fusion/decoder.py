"""Progressive-upsampling convolutional decoder from tokens to mask logits."""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn

from src.errors import ConfigurationError


def _conv_bn_relu(in_ch: int, out_ch: int) -> list[nn.Module]:
    return [
        nn.Conv2d(in_ch, out_ch, kernel_size=3, padding=1, bias=False),
        nn.BatchNorm2d(out_ch),
        nn.ReLU(inplace=True),
    ]


def _up_block(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
        *_conv_bn_relu(in_ch, out_ch),
        *_conv_bn_relu(out_ch, out_ch),
    )


class ProgressiveDecoder(nn.Module):
    """Reshape tokens to a √N×√N grid and upsample ×2 per stage."""

    def __init__(
        self,
        embed_dim: int,
        image_size: int,
        stages: int = 4,
        base_channels: int = 64,
        out_channels: int = 2,
    ) -> None:
        super().__init__()
        self.image_size = image_size
        self.out_channels = out_channels
        channels = [max(base_channels // 2**i, 16) for i in range(stages + 1)]
        self.stem = nn.Sequential(
            nn.Conv2d(embed_dim, channels[0], kernel_size=1),
            nn.BatchNorm2d(channels[0]),
            nn.ReLU(inplace=True),
        )
        self.blocks = nn.Sequential(*(_up_block(channels[i], channels[i + 1]) for i in range(stages)))
        self.head = nn.Conv2d(channels[-1], out_channels, kernel_size=1)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        return decode(tokens, self)


def decode(tokens: torch.Tensor, decoder: ProgressiveDecoder) -> torch.Tensor:
    """Decode (B, N, D) tokens into (B, C, H, W) logits.

    Raises:
        ConfigurationError: If N is not a perfect square.
    """
    batch, n_tokens, dim = tokens.shape
    side = math.isqrt(n_tokens)
    if side * side != n_tokens:
        raise ConfigurationError(f"Token count {n_tokens} is not a square grid")
    grid = tokens.transpose(1, 2).reshape(batch, dim, side, side)
    logits = decoder.head(decoder.blocks(decoder.stem(grid)))
    if logits.shape[-1] != decoder.image_size:
        logits = F.interpolate(
            logits, size=(decoder.image_size, decoder.image_size), mode="bilinear", align_corners=False
        )
    return logits
