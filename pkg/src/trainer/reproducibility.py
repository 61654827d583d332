"""Seeding, deterministic mode and device selection."""

from __future__ import annotations

import logging
import os
import random

import numpy as np
import torch

from src.errors import ConfigurationError

logger = logging.getLogger(__name__)

DETERMINISTIC_ENV = "ADF_DETERMINISTIC"


def deterministic_requested() -> bool:
    return os.environ.get(DETERMINISTIC_ENV, "").strip().lower() in ("1", "true", "yes", "on")


def seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed % (2**32))
    torch.manual_seed(seed)


def enable_deterministic() -> None:
    os.environ.setdefault("CUBLAS_WORKSPACE_CONFIG", ":4096:8")
    torch.use_deterministic_algorithms(True, warn_only=True)
    torch.backends.cudnn.benchmark = False
    torch.backends.cudnn.deterministic = True
    logger.info("[INFO] Deterministic mode enabled")


def resolve_device(name: str = "auto") -> torch.device:
    if name == "auto":
        return torch.device("cuda" if torch.cuda.is_available() else "cpu")
    try:
        return torch.device(name)
    except RuntimeError as exc:
        raise ConfigurationError(f"trainer.device '{name}' is not a valid device: {exc}") from exc
