"""Two-branch token encoder standing in for the segmentation backbone."""

from src.encoder.config import EncoderConfig
from src.encoder.types import DeepFeatureMap, EncoderOutput, TokenFeatureMap
from src.encoder.vit import PatchTokenEncoder, TwoBranchEncoder, encode

__all__ = [
    "DeepFeatureMap",
    "EncoderConfig",
    "EncoderOutput",
    "PatchTokenEncoder",
    "TokenFeatureMap",
    "TwoBranchEncoder",
    "encode",
]
