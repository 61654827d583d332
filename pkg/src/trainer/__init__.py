"""Training objective, progressive weighting, checkpoints and the fit loop."""

from src.trainer.config import AblationConfig, LossWeights, TrainConfig
from src.trainer.schedule import effective_lambda2, lambda2_schedule
from src.trainer.losses import foreground_probability, seg_losses
from src.trainer.report import LossReport, TrainingLog, epoch_reports, read_log
from src.trainer.reproducibility import deterministic_requested, enable_deterministic, resolve_device, seed_everything
from src.trainer.checkpoint import CheckpointState, load_checkpoint, restore_model, save_checkpoint
from src.trainer.engine import FitResult, Trainer, effective_fd_config, fit

__all__ = [
    "AblationConfig",
    "LossWeights",
    "TrainConfig",
    "effective_lambda2",
    "lambda2_schedule",
    "foreground_probability",
    "seg_losses",
    "LossReport",
    "TrainingLog",
    "epoch_reports",
    "read_log",
    "deterministic_requested",
    "enable_deterministic",
    "resolve_device",
    "seed_everything",
    "CheckpointState",
    "load_checkpoint",
    "restore_model",
    "save_checkpoint",
    "FitResult",
    "Trainer",
    "effective_fd_config",
    "fit",
]
