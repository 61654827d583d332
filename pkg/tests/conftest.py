"""Shared fixtures: a tiny experiment config and a tiny synthetic dataset."""

import sys
from pathlib import Path

import pytest
import torch

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.data.synthetic import synthesize_dataset  # noqa: E402
from src.experiment.config import ExperimentConfig  # noqa: E402

TINY = {
    "data": {
        "n_pairs": 10,
        "seed": 3,
        "generator": {"image_size": 32, "radius_min": 4.0, "radius_max": 8.0},
    },
    "encoder": {
        "image_size": 32,
        "patch_size": 8,
        "embed_dim": 16,
        "depth": 3,
        "num_heads": 2,
        "num_stages": 2,
    },
    "fusion": {"decoder_stages": 3, "base_channels": 16},
    "trainer": {"epochs": 2, "batch_size": 4, "checkpoint_every": 1, "device": "cpu"},
    "metrics": {"eval_batch_size": 4},
}


@pytest.fixture
def tiny_config() -> ExperimentConfig:
    return ExperimentConfig.from_dict(TINY)


@pytest.fixture
def tiny_manifest(tiny_config):
    data = tiny_config.data
    return synthesize_dataset(data.n_pairs, data.seed, data.generator)


@pytest.fixture
def tiny_batch(tiny_manifest):
    from src.data.batching import make_batches

    return next(make_batches(tiny_manifest.split("train"), 4, shuffle_seed=0))


@pytest.fixture(autouse=True)
def _seed():
    torch.manual_seed(0)


@pytest.fixture(scope="session")
def overfit_run(tmp_path_factory):
    """Model trained with ``configs/overfit.yaml``, restored from its last checkpoint."""
    from src.trainer.checkpoint import restore_model
    from src.trainer.engine import fit

    config = ExperimentConfig.load(Path(__file__).resolve().parent.parent / "configs" / "overfit.yaml")
    data = config.data
    manifest = synthesize_dataset(data.n_pairs, data.seed, data.generator)
    result = fit(manifest, config, tmp_path_factory.mktemp("overfit") / "run")
    model, _, _ = restore_model(result.checkpoint_path, "cpu")
    return model, config, manifest.split("train")
