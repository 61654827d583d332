import csv
import json
import math

import numpy as np
import pytest
import torch

from src.data.manifest import DatasetManifest
from src.diagnostics.oracles import confusion_oracle, overlap_oracle
from src.errors import ContractError, ManifestError
from src.metrics.embeddings import ROLES, collect_embeddings, disentangle_diagnostics, summarize
from src.metrics.evaluate import GroundTruthOracle, ImageScore, binarize, dataset_means, evaluate
from src.metrics.plots import plot_loss_curves, plot_metric_bars
from src.metrics.segmentation import ConfusionCounts, confusion, metrics_from_counts
from src.model.network import build_model
from src.trainer.report import LossReport


class TestConfusion:
    def test_counts(self):
        pred = np.array([[1, 1, 0], [0, 0, 1]])
        gt = np.array([[1, 0, 0], [1, 0, 1]])
        assert confusion(pred, gt) == ConfusionCounts(tp=2, fp=1, fn=1, tn=2)

    def test_rejects_non_binary(self):
        with pytest.raises(ContractError):
            confusion(np.array([[2, 0]]), np.array([[1, 0]]))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ContractError):
            confusion(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_negative_counts_rejected(self):
        with pytest.raises(ContractError):
            ConfusionCounts(tp=-1, fp=0, fn=0, tn=0)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_loops(self, seed):
        rng = np.random.default_rng(seed)
        pred = rng.integers(0, 2, (12, 9))
        gt = rng.integers(0, 2, (12, 9))
        counts = confusion(pred, gt)
        assert (counts.tp, counts.fp, counts.fn, counts.tn) == confusion_oracle(pred.tolist(), gt.tolist())
        assert counts.total == 12 * 9
        if counts.tp + counts.fp + counts.fn:
            iou, dice = overlap_oracle(pred.tolist(), gt.tolist())
            metrics = metrics_from_counts(counts)
            assert metrics["iou"] == pytest.approx(iou, abs=1e-12)
            assert metrics["dice"] == pytest.approx(dice, abs=1e-12)


class TestMetricsFromCounts:
    def test_worked_example(self):
        m = metrics_from_counts(ConfusionCounts(tp=30, fp=10, fn=20, tn=40))
        assert m["iou"] == pytest.approx(0.5)
        assert m["dice"] == pytest.approx(60 / 90)
        assert m["se"] == pytest.approx(0.6)
        assert m["gmean"] == pytest.approx(math.sqrt(0.6 * 0.8))

    def test_empty_prediction_and_truth(self):
        assert metrics_from_counts(ConfusionCounts(0, 0, 0, 16)) == {"iou": 1.0, "dice": 1.0, "se": 1.0, "gmean": 1.0}

    def test_false_positive_on_empty_truth(self):
        m = metrics_from_counts(ConfusionCounts(tp=0, fp=3, fn=0, tn=13))
        assert m["iou"] == 0.0 and m["dice"] == 0.0
        assert m["se"] is None and m["gmean"] is None

    def test_dice_iou_identity(self):
        m = metrics_from_counts(ConfusionCounts(tp=7, fp=5, fn=2, tn=50))
        assert m["dice"] == pytest.approx(2 * m["iou"] / (1 + m["iou"]))


class TestBinarize:
    def test_argmax_and_threshold(self):
        logits = torch.tensor([[[[0.0, 2.0]], [[1.0, 1.0]]]])
        assert binarize(logits).tolist() == [[[True, False]]]
        assert binarize(logits, 0.9).tolist() == [[[False, False]]]

    def test_single_channel(self):
        assert binarize(torch.tensor([[[[-1.0, 1.0]]]])).tolist() == [[[False, True]]]


class TestEvaluate:
    def test_oracle_scores_one(self, tiny_manifest):
        report = evaluate(GroundTruthOracle(), tiny_manifest, batch_size=3)
        assert report.n_images == len(tiny_manifest)
        assert [s.id for s in report.per_image] == tiny_manifest.ids
        assert report.means == {"iou": 1.0, "dice": 1.0, "se": 1.0, "gmean": 1.0}

    def test_repeatable_and_restores_mode(self, tiny_config, tiny_manifest):
        model = build_model(tiny_config)
        model.train()
        first = evaluate(model, tiny_manifest, batch_size=4)
        second = evaluate(model, tiny_manifest, batch_size=4)
        assert first.per_image == second.per_image
        assert model.training

    def test_empty_manifest(self):
        with pytest.raises(ManifestError):
            evaluate(GroundTruthOracle(), DatasetManifest(pairs=[]))

    def test_means_skip_undefined(self):
        scores = [
            ImageScore.from_counts("a", "tumor", ConfusionCounts(tp=1, fp=0, fn=1, tn=2)),
            ImageScore.from_counts("b", "benign", ConfusionCounts(tp=0, fp=2, fn=0, tn=2)),
        ]
        means = dataset_means(scores)
        assert means["iou"] == pytest.approx(0.25)
        assert means["se"] == pytest.approx(0.5)

    def test_report_files(self, tiny_manifest, tmp_path):
        report = evaluate(GroundTruthOracle(), tiny_manifest, config_hash="abc123")
        data = json.loads(report.save_json(tmp_path / "eval.json").read_text())
        assert data["n_images"] == len(tiny_manifest)
        assert data["config_hash"] == "abc123"
        with report.save_csv(tmp_path / "eval.csv").open(newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == len(tiny_manifest) + 1
        assert rows[-1]["id"] == "mean"


class TestEmbeddings:
    def test_dump(self, tiny_config, tiny_manifest, tmp_path):
        test = tiny_manifest.split("test")
        model = build_model(tiny_config)
        path, summary = disentangle_diagnostics(
            model, test, tmp_path / "embeddings.csv", batch_size=4, config_hash=tiny_config.config_hash()
        )
        with path.open(newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0][:4] == ["id", "feature_role", "label", "config_hash"]
        assert len(rows[0]) == 4 + tiny_config.encoder.embed_dim
        assert len(rows) - 1 == 4 * len(test)
        assert [r[1] for r in rows[1:5]] == list(ROLES)
        assert {r[2] for r in rows[1:]} <= {"tumor", "benign"}
        assert all(r[2] == test.get(r[0]).label for r in rows[1:])
        assert {r[3] for r in rows[1:]} == {tiny_config.config_hash()}
        assert all(math.isfinite(float(v)) for r in rows[1:] for v in r[4:])
        assert summary.n_samples == len(test)
        assert 0.0 <= summary.intra_abs_cos <= 1.0

    def test_single_modality_rejected(self, tiny_config, tiny_manifest):
        model = build_model(tiny_config.with_values({"trainer.model_kind": "wli_only"}))
        with pytest.raises(ContractError):
            collect_embeddings(model, tiny_manifest)

    def test_summary_of_known_vectors(self):
        e = torch.eye(4)
        vectors = {"z_ws": e[:1], "z_ns": e[:1], "z_wp": e[1:2], "z_np": -e[1:2]}
        summary = summarize(vectors)
        assert summary.shared_cross_cos == pytest.approx(1.0, abs=1e-6)
        assert summary.specific_cross_cos == pytest.approx(-1.0, abs=1e-6)
        assert summary.intra_abs_cos == pytest.approx(0.0, abs=1e-6)


class TestPlots:
    def test_files_written(self, tmp_path):
        reports = [
            LossReport(epoch=e, step=e, da=0.1, align=0.2, diff=0.3, orth=0.1, dacl=1.0, fd=0.3, ce=0.5, dice=0.4,
                       total=0.6, lambda1=1e-4, lambda2=e / 3, lambda3=0.5, lambda4=0.5)
            for e in (1, 2, 3)
        ]
        assert plot_loss_curves(reports, tmp_path / "loss.png").stat().st_size > 0
        bars = plot_metric_bars([{"iou": 0.5, "dice": 0.6, "se": None, "gmean": 0.7}], ["a"], tmp_path / "bars.png")
        assert bars.stat().st_size > 0


@pytest.mark.slow
def test_trained_model_separates_shared_and_specific(overfit_run):
    model, config, train = overfit_run
    _, summary = disentangle_diagnostics(model, train, batch_size=config.metrics.eval_batch_size)
    assert summary.shared_cross_cos > summary.intra_w_abs_cos
    assert summary.shared_cross_cos > summary.intra_n_abs_cos
    assert summary.shared_cross_cos > 0.8
    assert summary.intra_abs_cos < 0.3
    assert summary.specific_cross_cos < 0.0
