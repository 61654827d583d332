"""Multi-scale descriptors and MMD distribution alignment."""

from src.alignment.config import AUTO, MMDConfig
from src.alignment.descriptors import (
    AttentionScorer,
    GlobalDescriptor,
    MultiScaleFeature,
    attention_pool,
    concat_multiscale,
    global_average,
    global_descriptor,
)
from src.alignment.mmd import gaussian_kernel, median_bandwidth, mmd_loss

__all__ = [
    "AUTO",
    "AttentionScorer",
    "GlobalDescriptor",
    "MMDConfig",
    "MultiScaleFeature",
    "attention_pool",
    "concat_multiscale",
    "gaussian_kernel",
    "global_average",
    "global_descriptor",
    "median_bandwidth",
    "mmd_loss",
]
