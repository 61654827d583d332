"""Configuration for shared/specific fusion and the mask decoder."""

from __future__ import annotations

from dataclasses import dataclass

from src.errors import ConfigurationError


@dataclass
class FusionConfig:
    decoder_stages: int = 4
    base_channels: int = 64
    hidden_dim: int = 0  # 0: same as the embedding dim
    out_channels: int = 2  # 2: softmax over {background, lesion}; 1: sigmoid
    shared_bias: bool = True

    def validate(self) -> None:
        if self.decoder_stages < 1:
            raise ConfigurationError(f"fusion.decoder_stages must be >= 1, got {self.decoder_stages}")
        if self.base_channels < 1:
            raise ConfigurationError(f"fusion.base_channels must be >= 1, got {self.base_channels}")
        if self.out_channels not in (1, 2):
            raise ConfigurationError(f"fusion.out_channels must be 1 or 2, got {self.out_channels}")
        if self.hidden_dim < 0:
            raise ConfigurationError(f"fusion.hidden_dim must be >= 0, got {self.hidden_dim}")
