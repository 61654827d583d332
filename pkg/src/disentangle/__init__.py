"""Shared/specific projections and the feature-disentanglement objective."""

from src.disentangle.config import FDConfig
from src.disentangle.losses import (
    FD_TERMS,
    cosine,
    loss_align,
    loss_dacl,
    loss_diff,
    loss_fd,
    loss_orth,
    weighted_fd,
)
from src.disentangle.projectors import DisentangledBundle, DisentangleHead, TokenMLP, pool_tokens, project

__all__ = [
    "DisentangleHead",
    "DisentangledBundle",
    "FDConfig",
    "FD_TERMS",
    "TokenMLP",
    "cosine",
    "loss_align",
    "loss_dacl",
    "loss_diff",
    "loss_fd",
    "loss_orth",
    "pool_tokens",
    "project",
    "weighted_fd",
]
