"""Pixel confusion counts and overlap metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.errors import ContractError

METRIC_NAMES = ("iou", "dice", "se", "gmean")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ContractError(f"Confusion count {name} must be >= 0, got {getattr(self, name)}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)


def _as_binary(name: str, array: np.ndarray) -> np.ndarray:
    array = np.asarray(array)
    if array.dtype != bool and not np.isin(array, (0, 1)).all():
        raise ContractError(f"{name} must be binary")
    return array.astype(bool)


def confusion(pred: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    """Exact pixel counts for one binary prediction against its ground truth."""
    pred = _as_binary("Prediction", pred)
    gt = _as_binary("Ground truth", gt)
    if pred.shape != gt.shape:
        raise ContractError(f"Prediction shape {pred.shape} does not match ground truth {gt.shape}")
    return ConfusionCounts(
        tp=int(np.count_nonzero(pred & gt)),
        fp=int(np.count_nonzero(pred & ~gt)),
        fn=int(np.count_nonzero(~pred & gt)),
        tn=int(np.count_nonzero(~pred & ~gt)),
    )


def specificity(c: ConfusionCounts) -> float:
    return c.tn / (c.tn + c.fp) if c.tn + c.fp > 0 else 1.0


def metrics_from_counts(c: ConfusionCounts) -> dict[str, Optional[float]]:
    """IoU, Dice, sensitivity and G-mean = √(SE · SP).

    Empty ground truth with an empty prediction scores 1 everywhere. Empty
    ground truth with any predicted pixel scores IoU = Dice = 0 and leaves
    SE and G-mean undefined (``None``), so they drop out of dataset means.
    """
    if c.tp + c.fp + c.fn == 0:
        return {"iou": 1.0, "dice": 1.0, "se": 1.0, "gmean": 1.0}
    iou = c.tp / (c.tp + c.fp + c.fn)
    dice = 2 * c.tp / (2 * c.tp + c.fp + c.fn)
    if c.tp + c.fn == 0:
        return {"iou": iou, "dice": dice, "se": None, "gmean": None}
    se = c.tp / (c.tp + c.fn)
    return {"iou": iou, "dice": dice, "se": se, "gmean": math.sqrt(se * specificity(c))}
