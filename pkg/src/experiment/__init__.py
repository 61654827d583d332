"""Experiment configuration and run records."""

from src.experiment.config import ExperimentConfig, MetricsConfig
from src.experiment.runs import Run, RunManager, RunStatus, get_default_output_dir

__all__ = ["ExperimentConfig", "MetricsConfig", "Run", "RunManager", "RunStatus", "get_default_output_dir"]
