"""Paired-modality datasets: synthetic generation, directory ingestion, batching."""

from src.data.batching import Batch, PairDataset, make_batches
from src.data.config import DataConfig, GeneratorConfig
from src.data.manifest import DatasetManifest, PlantedFactors, SamplePair
from src.data.storage import load_directory, save_directory
from src.data.synthetic import lesion_geometry, render_pair, synthesize_dataset

__all__ = [
    "Batch",
    "DataConfig",
    "DatasetManifest",
    "GeneratorConfig",
    "PairDataset",
    "PlantedFactors",
    "SamplePair",
    "lesion_geometry",
    "load_directory",
    "make_batches",
    "render_pair",
    "save_directory",
    "synthesize_dataset",
]
