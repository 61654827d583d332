"""Progressive weighting of the disentanglement loss."""

from __future__ import annotations

from src.errors import ContractError
from src.trainer.config import TrainConfig


def lambda2_schedule(epoch: int, total_epochs: int, alpha_fd_max: float, alpha_fd_init: float) -> float:
    """min(alpha_fd_max, (e / E) · alpha_fd_init) for 1 <= e <= E."""
    if not 1 <= epoch <= total_epochs:
        raise ContractError(f"Epoch {epoch} outside [1, {total_epochs}]")
    return min(alpha_fd_max, (epoch / total_epochs) * alpha_fd_init)


def effective_lambda2(epoch: int, config: TrainConfig) -> float:
    """Scheduled λ2, or the constant cap when the progressive schedule is off."""
    if not config.ablation.ts:
        if not 1 <= epoch <= config.epochs:
            raise ContractError(f"Epoch {epoch} outside [1, {config.epochs}]")
        return config.alpha_fd_max
    return lambda2_schedule(epoch, config.epochs, config.alpha_fd_max, config.alpha_fd_init)
