import pytest
import torch

from src.errors import ConfigurationError, ContractError
from src.model.network import ADFSegmentationNet, ModelKind, SingleModalityNet, build_model


class TestBuildModel:
    @pytest.mark.parametrize(
        "kind,expected",
        [("multimodal", ADFSegmentationNet), ("wli_only", SingleModalityNet), ("nbi_only", SingleModalityNet)],
    )
    def test_kinds(self, tiny_config, kind, expected):
        config = tiny_config.with_values({"trainer.model_kind": kind})
        assert isinstance(build_model(config), expected)

    def test_unknown_kind(self, tiny_config):
        tiny_config.trainer.model_kind = "rgb_depth"
        with pytest.raises(ConfigurationError, match="model_kind"):
            build_model(tiny_config)

    def test_labels(self):
        assert ModelKind.MULTIMODAL.label == "WLI + NBI"
        assert ModelKind.NBI_ONLY.label == "NBI only"


class TestForward:
    def test_multimodal_outputs(self, tiny_config, tiny_batch):
        model = build_model(tiny_config)
        output = model(tiny_batch.x_w, tiny_batch.x_n)
        assert output.logits.shape == (4, 2, 32, 32)
        assert output.is_multimodal
        # two stages of 16 features each
        assert output.descriptor_w.global_feature.shape == (4, 32)
        assert output.bundle.z_ws.shape == (4, 16)
        assert output.fused.fused.shape == (4, 16, 16)

    def test_single_modality_ignores_other_input(self, tiny_config, tiny_batch):
        model = build_model(tiny_config.with_values({"trainer.model_kind": "wli_only"})).eval()
        with torch.no_grad():
            a = model(tiny_batch.x_w, tiny_batch.x_n)
            b = model(tiny_batch.x_w, torch.zeros_like(tiny_batch.x_n))
        assert not a.is_multimodal
        assert torch.equal(a.logits, b.logits)

    def test_single_modality_batch_mismatch(self, tiny_config, tiny_batch):
        model = build_model(tiny_config.with_values({"trainer.model_kind": "nbi_only"}))
        with pytest.raises(ContractError):
            model(tiny_batch.x_w, tiny_batch.x_n[:2])

    def test_predict_logits_matches_forward(self, tiny_config, tiny_batch):
        model = build_model(tiny_config).eval()
        with torch.no_grad():
            assert torch.equal(model.predict_logits(tiny_batch), model(tiny_batch.x_w, tiny_batch.x_n).logits)

    def test_detached_encoder_blocks_alignment_gradient(self, tiny_config, tiny_batch):
        model = build_model(tiny_config.with_values({"alignment.detach_encoder": True}))
        output = model(tiny_batch.x_w, tiny_batch.x_n)
        output.descriptor_w.global_feature.sum().backward()
        grads = [p.grad for p in model.encoder.parameters() if p.grad is not None]
        assert all(torch.count_nonzero(g) == 0 for g in grads)
        assert any(p.grad is not None for p in model.scorer_w.parameters())
