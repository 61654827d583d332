"""Overlap metrics, evaluation reports and disentanglement diagnostics."""

from src.metrics.segmentation import METRIC_NAMES, ConfusionCounts, confusion, metrics_from_counts, specificity
from src.metrics.evaluate import EvalReport, GroundTruthOracle, ImageScore, binarize, dataset_means, evaluate
from src.metrics.embeddings import EmbeddingSummary, disentangle_diagnostics, summarize, write_embeddings

__all__ = [
    "METRIC_NAMES",
    "ConfusionCounts",
    "EmbeddingSummary",
    "EvalReport",
    "GroundTruthOracle",
    "ImageScore",
    "binarize",
    "confusion",
    "dataset_means",
    "disentangle_diagnostics",
    "evaluate",
    "metrics_from_counts",
    "specificity",
    "summarize",
    "write_embeddings",
]
