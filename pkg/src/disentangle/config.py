"""Configuration for shared/specific disentanglement."""

from __future__ import annotations

from dataclasses import dataclass

from src.errors import ConfigurationError

POOLING_MODES = ("mean", "flatten")


@dataclass
class FDConfig:
    alpha: float = 1.0 / 3.0
    beta: float = 1.0 / 3.0
    gamma: float = 1.0 / 3.0
    delta: float = 0.01
    tau: float = 0.07
    symmetrize_dacl: bool = False
    pooling: str = "mean"

    def validate(self) -> None:
        for name in ("alpha", "beta", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"disentangle.{name} must be >= 0, got {getattr(self, name)}")
        if self.tau <= 0:
            raise ConfigurationError(f"disentangle.tau must be > 0, got {self.tau}")
        if self.pooling not in POOLING_MODES:
            raise ConfigurationError(
                f"disentangle.pooling must be one of {', '.join(POOLING_MODES)}, got '{self.pooling}'"
            )
