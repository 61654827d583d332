"""Training configuration, ablation switches and per-epoch loss weights."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from src.errors import ConfigurationError

if TYPE_CHECKING:
    from src.experiment.config import ExperimentConfig


@dataclass
class AblationConfig:
    """Component switches: distribution alignment, preliminary
    disentanglement, contrastive learning, progressive schedule."""

    da: bool = True
    pd: bool = True
    dacl: bool = True
    ts: bool = True

    @property
    def label(self) -> str:
        names = [name.upper() for name in ("da", "pd", "dacl", "ts") if getattr(self, name)]
        return "+".join(names) if names else "baseline"


@dataclass
class TrainConfig:
    epochs: int = 150
    lr: float = 1e-3
    batch_size: int = 24
    seed: int = 0
    lambda_ce: float = 0.5
    lambda_dice: float = 0.5
    alpha_fd_max: float = 1.0
    alpha_fd_init: float = 1.0
    dice_smooth: float = 1.0
    checkpoint_every: int = 10
    model_kind: str = "multimodal"
    device: str = "auto"
    ablation: AblationConfig = field(default_factory=AblationConfig)

    def validate(self) -> None:
        if self.epochs < 1:
            raise ConfigurationError(f"trainer.epochs must be >= 1, got {self.epochs}")
        if self.lr < 0:
            raise ConfigurationError(f"trainer.lr must be >= 0, got {self.lr}")
        if self.batch_size < 2:
            raise ConfigurationError(f"trainer.batch_size must be >= 2, got {self.batch_size}")
        for name in ("lambda_ce", "lambda_dice", "alpha_fd_max", "alpha_fd_init", "dice_smooth"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"trainer.{name} must be >= 0, got {getattr(self, name)}")
        if self.checkpoint_every < 1:
            raise ConfigurationError(f"trainer.checkpoint_every must be >= 1, got {self.checkpoint_every}")


@dataclass(frozen=True)
class LossWeights:
    """Effective λ1..λ4 of one epoch plus the schedule parameters."""

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    alpha_fd_max: float = 1.0
    alpha_fd_init: float = 1.0

    def __post_init__(self) -> None:
        for name in ("lambda1", "lambda2", "lambda3", "lambda4", "alpha_fd_max", "alpha_fd_init"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"Loss weight {name} must be >= 0, got {getattr(self, name)}")

    @classmethod
    def for_epoch(cls, epoch: int, config: "ExperimentConfig") -> "LossWeights":
        from src.trainer.schedule import effective_lambda2

        train = config.trainer
        return cls(
            lambda1=config.alignment.lambda_da if train.ablation.da else 0.0,
            lambda2=effective_lambda2(epoch, train),
            lambda3=train.lambda_ce,
            lambda4=train.lambda_dice,
            alpha_fd_max=train.alpha_fd_max,
            alpha_fd_init=train.alpha_fd_init,
        )
