import json

import numpy as np
import pytest
from PIL import Image

from src.data.batching import make_batches
from src.data.config import GeneratorConfig
from src.data.manifest import DatasetManifest, PlantedFactors, SamplePair
from src.data.storage import load_directory, save_directory
from src.data.synthetic import SHARED_DIM, lesion_geometry, render_pair, sample_factors, synthesize_dataset
from src.errors import ConfigurationError, ManifestError


def _pair(sample_id: str, size: int = 8, split: str = "train") -> SamplePair:
    image = np.zeros((size, size, 3), dtype=np.float32)
    return SamplePair(x_w=image, x_n=image.copy(), mask=np.zeros((size, size), dtype=np.uint8), id=sample_id, split=split)


class TestSynthesize:
    def test_same_seed_is_bit_identical(self):
        config = GeneratorConfig(image_size=32, radius_min=4.0, radius_max=8.0)
        a = synthesize_dataset(4, 7, config)
        b = synthesize_dataset(4, 7, config)
        assert len(a) == 4
        for p, q in zip(a, b):
            assert p.id == q.id
            assert np.array_equal(p.x_w, q.x_w)
            assert np.array_equal(p.x_n, q.x_n)
            assert np.array_equal(p.mask, q.mask)

    def test_zero_specific_codes_share_lesion_boundary(self):
        config = GeneratorConfig(image_size=32, radius_min=4.0, radius_max=8.0, noise_std=0.0)
        factors = sample_factors(np.random.default_rng(0), config, tumor=True)
        zeros_w = np.zeros_like(factors.specific_w)
        zeros_n = np.zeros_like(factors.specific_n)
        lesion = PlantedFactors(shared_code=factors.shared_code, specific_w=zeros_w, specific_n=zeros_n)
        empty = PlantedFactors(shared_code=np.zeros(SHARED_DIM), specific_w=zeros_w, specific_n=zeros_n)
        x_w, x_n, _ = render_pair(lesion, config)
        bg_w, bg_n, _ = render_pair(empty, config)
        dev_w = np.abs(x_w - bg_w).sum(-1)
        dev_n = np.abs(x_n - bg_n).sum(-1)
        assert np.allclose(dev_w / dev_w.max(), dev_n / dev_n.max(), atol=1e-4)

    def test_mask_depends_on_shared_code_only(self):
        config = GeneratorConfig(image_size=32, radius_min=4.0, radius_max=8.0)
        rng = np.random.default_rng(1)
        a = sample_factors(rng, config, tumor=True)
        b = sample_factors(rng, config, tumor=True)
        swapped = PlantedFactors(shared_code=a.shared_code, specific_w=b.specific_w, specific_n=b.specific_n)
        assert np.array_equal(render_pair(a, config)[2], render_pair(swapped, config)[2])

    def test_mean_foreground_fraction_in_configured_range(self):
        config = GeneratorConfig(image_size=64, radius_min=7.0, radius_max=16.0, tumor_fraction=1.0)
        manifest = synthesize_dataset(100, 1, config)
        fractions = [np.count_nonzero(p.mask) / p.mask.size for p in manifest]
        low, high = config.expected_foreground_range()
        assert low <= float(np.mean(fractions)) <= high

    def test_benign_pairs_have_empty_mask_and_zero_shared_code(self):
        config = GeneratorConfig(image_size=32, radius_min=4.0, radius_max=8.0, tumor_fraction=0.0)
        manifest = synthesize_dataset(5, 2, config)
        for pair in manifest:
            assert pair.label == "benign"
            assert not pair.mask.any()
            assert np.array_equal(pair.factors.shared_code, np.zeros(SHARED_DIM))

    def test_train_and_test_are_disjoint(self):
        manifest = synthesize_dataset(10, 3, GeneratorConfig(image_size=32, radius_min=4.0, radius_max=8.0))
        train, test = set(manifest.split("train").ids), set(manifest.split("test").ids)
        assert len(test) == 2
        assert not train & test
        assert len(train | test) == 10

    def test_rejects_zero_pairs(self):
        with pytest.raises(ConfigurationError):
            synthesize_dataset(0, 1)

    def test_lesion_geometry_is_binary(self):
        mask, soft = lesion_geometry(np.array([1.0, 16.0, 16.0, 6.0, 0.1, 0.3, -0.2]), 32, 1.5)
        assert set(np.unique(mask)) <= {0, 1}
        assert soft.min() >= 0.0 and soft.max() <= 1.0


class TestManifest:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(ManifestError, match="dup"):
            DatasetManifest(pairs=[_pair("dup"), _pair("dup", split="test")])

    def test_mismatched_sizes_rejected(self):
        image = np.zeros((8, 8, 3), dtype=np.float32)
        with pytest.raises(ManifestError):
            SamplePair(x_w=image, x_n=np.zeros((4, 4, 3), dtype=np.float32), mask=np.zeros((8, 8), np.uint8), id="a")

    def test_statistics_counts_splits_and_labels(self, tiny_manifest):
        stats = tiny_manifest.statistics()
        assert sum(sum(counts.values()) for counts in stats.values()) == len(tiny_manifest)
        assert sum(stats["test"].values()) == 2


class TestStorage:
    def test_round_trip_keeps_ids_labels_and_masks(self, tiny_manifest, tmp_path):
        save_directory(tiny_manifest, tmp_path)
        loaded = load_directory(tmp_path, resize=(32, 32))
        assert sorted(loaded.ids) == sorted(tiny_manifest.ids)
        for pair in tiny_manifest:
            other = loaded.get(pair.id)
            assert other.label == pair.label
            assert other.split == pair.split
            assert np.array_equal(other.mask, pair.mask)
            assert np.abs(other.x_w - pair.x_w).max() <= 1.0 / 255.0 + 1e-6

    def test_index_records_config_hash_and_labels(self, tiny_config, tiny_manifest, tmp_path):
        save_directory(tiny_manifest, tmp_path, config_hash=tiny_config.config_hash())
        index = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        assert index["config_hash"] == tiny_config.config_hash()
        assert {entry["id"]: entry["label"] for entry in index["pairs"]} == {p.id: p.label for p in tiny_manifest}

    def test_directory_of_three_ids(self, tmp_path):
        manifest = DatasetManifest(pairs=[_pair(f"id{i}") for i in range(3)])
        save_directory(manifest, tmp_path)
        assert len(load_directory(tmp_path, resize=None)) == 3

    def test_missing_mask_names_the_id(self, tmp_path):
        manifest = DatasetManifest(pairs=[_pair("keep"), _pair("broken")])
        save_directory(manifest, tmp_path)
        (tmp_path / "train" / "masks" / "broken.png").unlink()
        with pytest.raises(ManifestError, match="broken"):
            load_directory(tmp_path)

    def test_large_images_are_resized(self, tmp_path):
        for sub in ("images_w", "images_n", "masks"):
            (tmp_path / "train" / sub).mkdir(parents=True)
        rgb = np.full((448, 448, 3), 128, dtype=np.uint8)
        Image.fromarray(rgb).save(tmp_path / "train" / "images_w" / "big.png")
        Image.fromarray(rgb).save(tmp_path / "train" / "images_n" / "big.png")
        mask = np.zeros((448, 448), dtype=np.uint8)
        mask[100:300, 100:300] = 255
        Image.fromarray(mask).save(tmp_path / "train" / "masks" / "big.png")
        pair = load_directory(tmp_path, resize=(224, 224)).get("big")
        assert pair.x_w.shape == (224, 224, 3)
        assert pair.mask.shape == (224, 224)
        assert pair.label == "tumor"

    def test_labels_come_from_manifest_index(self, tmp_path):
        pair = _pair("a")
        pair.mask[2:5, 2:5] = 1
        manifest = DatasetManifest(pairs=[pair])
        save_directory(manifest, tmp_path)
        index = json.loads((tmp_path / "manifest.json").read_text())
        index["pairs"][0]["label"] = "benign"
        (tmp_path / "manifest.json").write_text(json.dumps(index))
        assert load_directory(tmp_path, resize=None).get("a").label == "benign"


class TestBatching:
    def _manifest(self, n: int) -> DatasetManifest:
        return DatasetManifest(pairs=[_pair(f"p{i}") for i in range(n)])

    def test_train_drops_short_batch(self):
        sizes = [len(b) for b in make_batches(self._manifest(10), 4, shuffle_seed=1, train=True)]
        assert sizes == [4, 4]

    def test_eval_keeps_short_batch_in_order(self):
        batches = list(make_batches(self._manifest(10), 4, train=False))
        assert [len(b) for b in batches] == [4, 4, 2]
        assert [i for b in batches for i in b.ids] == [f"p{i}" for i in range(10)]

    def test_fixed_seed_fixed_order(self):
        first = [b.ids for b in make_batches(self._manifest(10), 4, shuffle_seed=5)]
        second = [b.ids for b in make_batches(self._manifest(10), 4, shuffle_seed=5)]
        assert first == second

    def test_training_needs_two_samples(self):
        with pytest.raises(ConfigurationError):
            list(make_batches(self._manifest(4), 1, train=True))

    def test_tensor_layout(self, tiny_batch):
        assert tiny_batch.x_w.shape == (4, 3, 32, 32)
        assert tiny_batch.mask.shape == (4, 32, 32)
