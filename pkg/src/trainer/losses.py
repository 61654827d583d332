"""Pixel-level segmentation supervision: cross-entropy and soft Dice."""

from __future__ import annotations

import torch
import torch.nn.functional as F

from src.errors import ContractError


def foreground_probability(logits: torch.Tensor) -> torch.Tensor:
    """(B, H, W) lesion probability from 2-channel softmax or 1-channel sigmoid logits."""
    if logits.shape[1] == 2:
        return torch.softmax(logits, dim=1)[:, 1]
    if logits.shape[1] == 1:
        return torch.sigmoid(logits[:, 0])
    raise ContractError(f"Expected 1 or 2 logit channels, got {logits.shape[1]}")


def seg_losses(logits: torch.Tensor, mask: torch.Tensor, smooth: float = 1.0) -> tuple[torch.Tensor, torch.Tensor]:
    """Mean pixel cross-entropy and batch soft Dice loss.

    Dice = 1 − (2|P∩G| + s) / (|P| + |G| + s) with P the foreground
    probabilities summed over the whole batch.

    Raises:
        ContractError: If the mask is not binary or shapes disagree.
    """
    if mask.shape != (logits.shape[0], *logits.shape[2:]):
        raise ContractError(f"Mask shape {tuple(mask.shape)} does not match logits {tuple(logits.shape)}")
    if torch.any((mask != 0) & (mask != 1)):
        raise ContractError("Mask must be binary")

    target = mask.float()
    if logits.shape[1] == 2:
        ce = F.cross_entropy(logits, mask.long())
    else:
        ce = F.binary_cross_entropy_with_logits(logits[:, 0], target)
    prob = foreground_probability(logits)
    intersection = (prob * target).sum()
    dice = 1.0 - (2.0 * intersection + smooth) / (prob.sum() + target.sum() + smooth)
    return ce, dice
