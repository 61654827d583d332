"""Cross-modal shared aggregation and additive shared/specific fusion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import torch
from torch import nn

from src.disentangle.projectors import DisentangledBundle, TokenMLP
from src.errors import ContractError

TokenMap = Callable[[torch.Tensor], torch.Tensor]


@dataclass
class FusedFeature:
    shared: torch.Tensor  # Z_sh, (B, N, D)
    fused: torch.Tensor  # Z_fused, (B, N, D)


def _check_same_shape(**tensors: torch.Tensor) -> None:
    shapes = {name: tuple(t.shape) for name, t in tensors.items()}
    if len(set(shapes.values())) != 1:
        raise ContractError(f"Token maps differ in shape: {shapes}")
    first = next(iter(tensors.values()))
    if first.ndim != 3:
        raise ContractError(f"Expected (B, N, D) token maps, got {tuple(first.shape)}")


def aggregate_shared(tokens_ws: torch.Tensor, tokens_ns: torch.Tensor, f_sh: TokenMap) -> torch.Tensor:
    """Concatenate the shared maps on the feature axis and map 2D → D per token."""
    _check_same_shape(tokens_ws=tokens_ws, tokens_ns=tokens_ns)
    return f_sh(torch.cat([tokens_ws, tokens_ns], dim=-1))


def fuse(
    shared: torch.Tensor,
    tokens_wp: torch.Tensor,
    tokens_np: torch.Tensor,
    f_sh_prime: TokenMap,
    f_w: TokenMap,
    f_n: TokenMap,
) -> torch.Tensor:
    """Z_fused = f'_sh(Z_sh) + f_w(Z_wp) + f_n(Z_np)."""
    _check_same_shape(shared=shared, tokens_wp=tokens_wp, tokens_np=tokens_np)
    return f_sh_prime(shared) + f_w(tokens_wp) + f_n(tokens_np)


class FusionHead(nn.Module):
    """Parameters of the fusion stage: f_sh (linear) and f'_sh, f_w, f_n (MLPs)."""

    def __init__(self, dim: int, hidden: int = 0, shared_bias: bool = True) -> None:
        super().__init__()
        self.f_sh = nn.Linear(2 * dim, dim, bias=shared_bias)
        self.f_sh_prime = TokenMLP(dim, hidden or None)
        self.f_w = TokenMLP(dim, hidden or None)
        self.f_n = TokenMLP(dim, hidden or None)

    def forward(self, bundle: DisentangledBundle) -> FusedFeature:
        shared = aggregate_shared(bundle.tokens_ws, bundle.tokens_ns, self.f_sh)
        fused = fuse(shared, bundle.tokens_wp, bundle.tokens_np, self.f_sh_prime, self.f_w, self.f_n)
        return FusedFeature(shared=shared, fused=fused)
