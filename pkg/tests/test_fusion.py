import pytest
import torch
import torch.nn.functional as F

from src.disentangle.projectors import DisentangledBundle, TokenMLP
from src.errors import ConfigurationError, ContractError
from src.fusion.decoder import ProgressiveDecoder, decode
from src.fusion.fusion import FusionHead, aggregate_shared, fuse


class TestAggregate:
    def test_shape(self):
        f_sh = torch.nn.Linear(16, 8)
        out = aggregate_shared(torch.randn(2, 4, 8), torch.randn(2, 4, 8), f_sh)
        assert out.shape == (2, 4, 8)

    def test_zero_map_gives_zero(self):
        f_sh = torch.nn.Linear(16, 8)
        torch.nn.init.zeros_(f_sh.weight)
        torch.nn.init.zeros_(f_sh.bias)
        assert torch.count_nonzero(aggregate_shared(torch.randn(2, 4, 8), torch.randn(2, 4, 8), f_sh)) == 0

    def test_linear_without_bias(self):
        f_sh = torch.nn.Linear(16, 8, bias=False).double()
        x, y = torch.randn(2, 4, 8, dtype=torch.float64), torch.randn(2, 4, 8, dtype=torch.float64)
        assert torch.allclose(aggregate_shared(3.0 * x, 3.0 * y, f_sh), 3.0 * aggregate_shared(x, y, f_sh))

    def test_mismatch_rejected(self):
        with pytest.raises(ContractError):
            aggregate_shared(torch.randn(2, 4, 8), torch.randn(2, 5, 8), torch.nn.Linear(16, 8))


class TestFuse:
    def test_zero_maps_give_zero(self):
        maps = [TokenMLP(8).zero_init() for _ in range(3)]
        out = fuse(torch.randn(2, 4, 8), torch.randn(2, 4, 8), torch.randn(2, 4, 8), *maps)
        assert torch.count_nonzero(out) == 0

    def test_zero_specific_leaves_shared_branch(self):
        f_sh_prime = TokenMLP(8)
        f_w, f_n = TokenMLP(8), TokenMLP(8)
        shared, zero = torch.randn(2, 4, 8), torch.zeros(2, 4, 8)
        out = fuse(shared, zero, zero, f_sh_prime, f_w, f_n)
        assert torch.allclose(out, f_sh_prime(shared) + f_w(zero) + f_n(zero))
        assert torch.allclose(fuse(shared, zero, zero, f_sh_prime, f_w.zero_init(), f_n.zero_init()), f_sh_prime(shared))

    def test_equals_sum_of_branches(self):
        maps = [TokenMLP(8) for _ in range(3)]
        z = [torch.randn(2, 4, 8) for _ in range(3)]
        expected = maps[0](z[0]) + maps[1](z[1]) + maps[2](z[2])
        assert torch.equal(fuse(*z, *maps), expected)

    def test_head_output(self):
        tokens = [torch.randn(2, 4, 8) for _ in range(4)]
        bundle = DisentangledBundle(*tokens, *(t.mean(1) for t in tokens))
        fused = FusionHead(8)(bundle)
        assert fused.shared.shape == fused.fused.shape == (2, 4, 8)


class TestDecoder:
    def test_default_geometry(self):
        decoder = ProgressiveDecoder(embed_dim=32, image_size=224)
        assert decoder(torch.randn(2, 196, 32)).shape == (2, 2, 224, 224)

    def test_deterministic_in_eval_mode(self):
        decoder = ProgressiveDecoder(embed_dim=8, image_size=32, stages=3, base_channels=16).eval()
        tokens = torch.randn(2, 16, 8)
        with torch.no_grad():
            assert torch.equal(decoder(tokens), decoder(tokens))

    def test_gradient_reaches_tokens(self):
        decoder = ProgressiveDecoder(embed_dim=8, image_size=32, stages=3, base_channels=16)
        tokens = torch.randn(2, 16, 8, requires_grad=True)
        target = torch.randint(0, 2, (2, 32, 32))
        F.cross_entropy(decode(tokens, decoder), target).backward()
        assert tokens.grad.norm() > 0

    def test_non_square_grid_rejected(self):
        decoder = ProgressiveDecoder(embed_dim=8, image_size=32, stages=3)
        with pytest.raises(ConfigurationError):
            decoder(torch.randn(2, 15, 8))

    def test_resizes_when_stages_fall_short(self):
        decoder = ProgressiveDecoder(embed_dim=8, image_size=32, stages=2, base_channels=16)
        assert decoder(torch.randn(2, 16, 8)).shape == (2, 2, 32, 32)


def test_decode_fuse_aggregate_matches_finite_differences():
    head = FusionHead(4).double()
    decoder = ProgressiveDecoder(embed_dim=4, image_size=8, stages=2, base_channels=16).double().eval()
    gen = torch.Generator().manual_seed(0)
    ws, wp, ns, np_ = (torch.randn(2, 4, 4, generator=gen, dtype=torch.float64) for _ in range(4))
    ws.requires_grad_(True)

    def summed_logits(tokens_ws):
        shared = aggregate_shared(tokens_ws, ns, head.f_sh)
        fused = fuse(shared, wp, np_, head.f_sh_prime, head.f_w, head.f_n)
        return decode(fused, decoder).sum()

    assert torch.autograd.gradcheck(summed_logits, (ws,), eps=1e-6, atol=1e-5, rtol=1e-2)
