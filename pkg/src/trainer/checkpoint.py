"""Single-file checkpoints: weights, optimizer state, epoch, config and RNG."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional

import torch
from torch import nn

from src.errors import CheckpointError

if TYPE_CHECKING:
    from src.experiment.config import ExperimentConfig

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
REQUIRED_KEYS = ("format", "model", "optimizer", "epoch", "config", "config_hash")


@dataclass
class CheckpointState:
    model_state: dict[str, torch.Tensor]
    optimizer_state: dict[str, Any]
    epoch: int
    config: dict[str, Any]
    config_hash: str
    sigma: Optional[float] = None
    rng_state: Optional[torch.Tensor] = None


def save_checkpoint(
    path: str | Path,
    model: nn.Module,
    optimizer: torch.optim.Optimizer,
    epoch: int,
    config: "ExperimentConfig",
    sigma: Optional[float] = None,
) -> Path:
    """Write a checkpoint atomically (temp file, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": FORMAT_VERSION,
        "model": model.state_dict(),
        "optimizer": optimizer.state_dict(),
        "epoch": epoch,
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "sigma": sigma,
        "rng": torch.get_rng_state(),
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(payload, tmp)
    os.replace(tmp, path)
    logger.info("[INFO] Checkpoint written: %s (epoch %d)", path, epoch)
    return path


def load_checkpoint(path: str | Path) -> CheckpointState:
    """Read a checkpoint from disk.

    Raises:
        CheckpointError: If the file is missing, unreadable or incomplete.
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"Checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as exc:
        raise CheckpointError(f"Checkpoint {path} is corrupt or unreadable: {exc}") from exc
    if not isinstance(payload, dict):
        raise CheckpointError(f"Checkpoint {path} does not contain a mapping")
    missing = [key for key in REQUIRED_KEYS if key not in payload]
    if missing:
        raise CheckpointError(f"Checkpoint {path} is missing: {', '.join(missing)}")
    if payload["format"] != FORMAT_VERSION:
        raise CheckpointError(f"Checkpoint {path} has unsupported format {payload['format']}")
    return CheckpointState(
        model_state=payload["model"],
        optimizer_state=payload["optimizer"],
        epoch=int(payload["epoch"]),
        config=payload["config"],
        config_hash=payload["config_hash"],
        sigma=payload.get("sigma"),
        rng_state=payload.get("rng"),
    )


def restore_model(
    path: str | Path,
    device: torch.device | str = "cpu",
) -> tuple[nn.Module, "ExperimentConfig", CheckpointState]:
    """Rebuild the network described by the checkpoint's embedded config."""
    from src.experiment.config import ExperimentConfig
    from src.model.network import build_model

    state = load_checkpoint(path)
    config = ExperimentConfig.from_dict(state.config)
    model = build_model(config)
    try:
        model.load_state_dict(state.model_state)
    except RuntimeError as exc:
        raise CheckpointError(f"Checkpoint {path} does not match its own config: {exc}") from exc
    model.to(device).eval()
    return model, config, state
