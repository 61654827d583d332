"""Shared-feature aggregation, shared/specific fusion and mask decoding."""

from src.fusion.config import FusionConfig
from src.fusion.decoder import ProgressiveDecoder, decode
from src.fusion.fusion import FusedFeature, FusionHead, aggregate_shared, fuse

__all__ = [
    "FusedFeature",
    "FusionConfig",
    "FusionHead",
    "ProgressiveDecoder",
    "aggregate_shared",
    "decode",
    "fuse",
]
