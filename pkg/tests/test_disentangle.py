import math

import pytest
import torch

from src.diagnostics import oracles
from src.disentangle.config import FDConfig
from src.disentangle.losses import loss_align, loss_dacl, loss_diff, loss_fd, loss_orth, weighted_fd
from src.disentangle.projectors import DisentangledBundle, DisentangleHead, pool_tokens, project
from src.encoder.types import DeepFeatureMap
from src.errors import ConfigurationError, ContractError

E = torch.eye(4, dtype=torch.float64)


def _random_bundle(seed: int, batch: int = 2, dim: int = 8) -> DisentangledBundle:
    gen = torch.Generator().manual_seed(seed)
    return DisentangledBundle.from_vectors(*(torch.randn(batch, dim, generator=gen, dtype=torch.float64) for _ in range(4)))


class TestProjection:
    def test_identity_projectors_pass_tokens_through(self):
        deep = torch.randn(2, 5, 8)
        bundle = project(
            DeepFeatureMap(deep, "w"), DeepFeatureMap(deep * 2, "n"),
            lambda x: x, lambda x: x, lambda x: x, lambda x: x,
        )
        assert torch.equal(bundle.tokens_ws, deep)
        assert torch.equal(bundle.tokens_np, deep * 2)

    def test_head_shapes(self):
        head = DisentangleHead(32)
        deep = torch.randn(2, 196, 32)
        bundle = head(DeepFeatureMap(deep, "w"), DeepFeatureMap(deep, "n"))
        for tokens in (bundle.tokens_ws, bundle.tokens_wp, bundle.tokens_ns, bundle.tokens_np):
            assert tokens.shape == (2, 196, 32)
        for vector in bundle.pooled().values():
            assert vector.shape == (2, 32)

    def test_pooled_is_token_mean(self):
        tokens = torch.randn(2, 5, 8, dtype=torch.float64)
        expected = torch.tensor(oracles.global_average_oracle(tokens), dtype=torch.float64)
        assert torch.allclose(pool_tokens(tokens), expected, atol=1e-6)

    def test_flatten_pooling(self):
        assert pool_tokens(torch.randn(2, 5, 8), "flatten").shape == (2, 40)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ContractError):
            project(
                DeepFeatureMap(torch.randn(2, 4, 8), "w"), DeepFeatureMap(torch.randn(2, 5, 8), "n"),
                lambda x: x, lambda x: x, lambda x: x, lambda x: x,
            )


class TestCosineLosses:
    def test_align_bounds(self):
        x = torch.randn(3, 6, dtype=torch.float64)
        assert loss_align(x, x).item() == pytest.approx(0.0, abs=1e-7)
        assert loss_align(x, -x).item() == pytest.approx(1.0, abs=1e-7)

    def test_diff_bounds(self):
        x = torch.randn(3, 6, dtype=torch.float64)
        assert loss_diff(x, -x).item() == pytest.approx(0.0, abs=1e-7)
        assert loss_diff(x, x).item() == pytest.approx(1.0, abs=1e-7)
        assert loss_diff(E[0:1], E[1:2]).item() == pytest.approx(0.5, abs=1e-12)

    def test_orth_cases(self):
        x = torch.randn(3, 6, dtype=torch.float64)
        assert loss_orth(E[0:1], E[1:2], E[2:3], E[3:4]).item() == pytest.approx(0.0, abs=1e-12)
        assert loss_orth(x, x, x, x).item() == pytest.approx(1.0, abs=1e-7)
        assert loss_orth(E[0:1], -E[0:1], E[2:3], E[3:4]).item() == pytest.approx(0.5, abs=1e-7)

    @pytest.mark.parametrize("seed", range(5))
    def test_match_loop_oracles(self, seed):
        b = _random_bundle(seed)
        assert loss_align(b.z_ws, b.z_ns).item() == pytest.approx(oracles.align_oracle(b.z_ws, b.z_ns), abs=1e-6)
        assert loss_diff(b.z_wp, b.z_np).item() == pytest.approx(oracles.diff_oracle(b.z_wp, b.z_np), abs=1e-6)
        assert loss_orth(b.z_ws, b.z_wp, b.z_ns, b.z_np).item() == pytest.approx(
            oracles.orth_oracle(b.z_ws, b.z_wp, b.z_ns, b.z_np), abs=1e-6
        )

    @pytest.mark.parametrize("scale", [0.5, 3.0, 100.0])
    def test_invariant_to_positive_rescaling(self, scale):
        b = _random_bundle(4, batch=3)
        per_row = scale * torch.tensor([[1.0], [2.0], [0.25]], dtype=torch.float64)
        s = DisentangledBundle.from_vectors(*(v * per_row for v in (b.z_ws, b.z_wp, b.z_ns, b.z_np)))
        assert loss_align(s.z_ws, s.z_ns).item() == pytest.approx(loss_align(b.z_ws, b.z_ns).item(), rel=1e-6)
        assert loss_diff(s.z_wp, s.z_np).item() == pytest.approx(loss_diff(b.z_wp, b.z_np).item(), rel=1e-6)
        assert loss_orth(s.z_ws, s.z_wp, s.z_ns, s.z_np).item() == pytest.approx(
            loss_orth(b.z_ws, b.z_wp, b.z_ns, b.z_np).item(), rel=1e-6
        )
        assert loss_dacl(s, 0.07).item() == pytest.approx(loss_dacl(b, 0.07).item(), rel=1e-6)

    def test_zero_vectors_stay_finite(self):
        z = torch.zeros(2, 4, requires_grad=True)
        loss = loss_align(z, z) + loss_diff(z, z) + loss_orth(z, z, z, z)
        loss.backward()
        assert torch.isfinite(loss)
        assert torch.isfinite(z.grad).all()


class TestContrastive:
    def test_orthogonal_single_sample_is_log_three(self):
        bundle = DisentangledBundle.from_vectors(E[0:1], E[1:2], E[2:3], E[3:4])
        assert loss_dacl(bundle, tau=1.0).item() == pytest.approx(math.log(3.0), abs=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_positive_and_matches_oracle(self, seed):
        b = _random_bundle(seed)
        value = loss_dacl(b, tau=0.07).item()
        assert value > 0
        assert value == pytest.approx(oracles.dacl_oracle(b.z_ws, b.z_wp, b.z_ns, b.z_np, 0.07), abs=1e-6)

    def test_symmetrized_averages_both_anchors(self):
        b = _random_bundle(11)
        mirrored = DisentangledBundle.from_vectors(b.z_ns, b.z_np, b.z_ws, b.z_wp)
        expected = 0.5 * (loss_dacl(b, 0.5).item() + loss_dacl(mirrored, 0.5).item())
        assert loss_dacl(b, 0.5, symmetrize=True).item() == pytest.approx(expected, abs=1e-12)

    def test_swapping_modalities_changes_the_loss(self):
        b = _random_bundle(2, batch=4)
        swapped = DisentangledBundle.from_vectors(b.z_ns, b.z_np, b.z_ws, b.z_wp)
        assert abs(loss_dacl(b, 0.5).item() - loss_dacl(swapped, 0.5).item()) > 1e-6
        assert loss_dacl(b, 0.5, symmetrize=True).item() == pytest.approx(
            loss_dacl(swapped, 0.5, symmetrize=True).item(), abs=1e-12
        )

    def test_nonpositive_temperature_rejected(self):
        with pytest.raises(ConfigurationError):
            loss_dacl(_random_bundle(0), tau=0.0)


class TestCombined:
    def test_zero_weights_give_zero(self):
        total, _ = loss_fd(_random_bundle(1), FDConfig(alpha=0.0, beta=0.0, gamma=0.0, delta=0.0))
        assert total.item() == 0.0

    def test_known_sub_losses(self):
        parts = {"align": 0.0, "diff": 1.0, "orth": 0.5, "dacl": math.log(3.0)}
        assert weighted_fd(parts, FDConfig()) == pytest.approx((1.0 + 0.5) / 3.0 + 0.01 * math.log(3.0), abs=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_total_is_weighted_sum_of_parts(self, seed):
        config = FDConfig(alpha=0.2, beta=0.3, gamma=0.4, delta=0.05)
        b = _random_bundle(seed)
        total, parts = loss_fd(b, config)
        recomposed = 0.2 * parts["align"] + 0.3 * parts["diff"] + 0.4 * parts["orth"] + 0.05 * parts["dacl"]
        assert total.item() == pytest.approx(recomposed.item(), abs=1e-7)
        assert total.item() == pytest.approx(
            oracles.fd_oracle(b.z_ws, b.z_wp, b.z_ns, b.z_np, 0.2, 0.3, 0.4, 0.05, config.tau), abs=1e-6
        )

    def test_gradients_match_finite_differences(self):
        inputs = tuple(torch.randn(2, 8, dtype=torch.float64, requires_grad=True) for _ in range(4))

        def fd(ws, wp, ns, np_):
            return loss_fd(DisentangledBundle.from_vectors(ws, wp, ns, np_), FDConfig())[0]

        assert torch.autograd.gradcheck(fd, inputs, eps=1e-4, atol=1e-6, rtol=1e-3)

    @pytest.mark.parametrize("field,value", [("alpha", -0.1), ("tau", 0.0), ("pooling", "max")])
    def test_invalid_config(self, field, value):
        with pytest.raises(ConfigurationError):
            FDConfig(**{field: value}).validate()
