"""Configuration for the two-branch token encoder."""

from __future__ import annotations

from dataclasses import dataclass

from src.errors import ConfigurationError


@dataclass
class EncoderConfig:
    in_channels: int = 3
    image_size: int = 224
    patch_size: int = 16
    embed_dim: int = 32
    depth: int = 6
    num_heads: int = 4
    num_stages: int = 3  # L shallow blocks tapped for alignment
    mlp_ratio: float = 2.0
    dropout: float = 0.0
    shared_weights: bool = False

    @property
    def grid_size(self) -> int:
        return self.image_size // self.patch_size

    @property
    def num_tokens(self) -> int:
        return self.grid_size**2

    def validate(self) -> None:
        if self.image_size % self.patch_size != 0:
            raise ConfigurationError(
                f"encoder.image_size ({self.image_size}) must be divisible by "
                f"encoder.patch_size ({self.patch_size})"
            )
        if self.embed_dim % self.num_heads != 0:
            raise ConfigurationError(
                f"encoder.embed_dim ({self.embed_dim}) must be divisible by "
                f"encoder.num_heads ({self.num_heads})"
            )
        if not 1 <= self.num_stages < self.depth:
            raise ConfigurationError(
                f"encoder.num_stages must satisfy 1 <= L < depth, got L={self.num_stages}, depth={self.depth}"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError(f"encoder.dropout must lie in [0, 1), got {self.dropout}")
