"""Shared/specific projection of the deep features of both modalities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import torch
from torch import nn

from src.encoder.types import DeepFeatureMap
from src.errors import ConfigurationError, ContractError

Projector = Callable[[torch.Tensor], torch.Tensor]


class TokenMLP(nn.Module):
    """Per-token two-layer MLP D → hidden → D."""

    def __init__(self, dim: int, hidden: int | None = None) -> None:
        super().__init__()
        hidden = hidden or dim
        self.net = nn.Sequential(nn.Linear(dim, hidden), nn.GELU(), nn.Linear(hidden, dim))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)

    def zero_init(self) -> "TokenMLP":
        """Make the module output exactly zero."""
        last = self.net[-1]
        nn.init.zeros_(last.weight)
        nn.init.zeros_(last.bias)
        return self


@dataclass
class DisentangledBundle:
    """Token maps (B, N, D) and their per-sample pooled vectors."""

    tokens_ws: torch.Tensor
    tokens_wp: torch.Tensor
    tokens_ns: torch.Tensor
    tokens_np: torch.Tensor
    z_ws: torch.Tensor
    z_wp: torch.Tensor
    z_ns: torch.Tensor
    z_np: torch.Tensor

    def pooled(self) -> dict[str, torch.Tensor]:
        return {"z_ws": self.z_ws, "z_wp": self.z_wp, "z_ns": self.z_ns, "z_np": self.z_np}

    @classmethod
    def from_vectors(
        cls, z_ws: torch.Tensor, z_wp: torch.Tensor, z_ns: torch.Tensor, z_np: torch.Tensor
    ) -> "DisentangledBundle":
        """Bundle of pooled vectors only, each treated as a single-token map."""
        return cls(
            tokens_ws=z_ws.unsqueeze(1),
            tokens_wp=z_wp.unsqueeze(1),
            tokens_ns=z_ns.unsqueeze(1),
            tokens_np=z_np.unsqueeze(1),
            z_ws=z_ws,
            z_wp=z_wp,
            z_ns=z_ns,
            z_np=z_np,
        )


def pool_tokens(tokens: torch.Tensor, mode: str = "mean") -> torch.Tensor:
    if mode == "mean":
        return tokens.mean(dim=1)
    if mode == "flatten":
        return tokens.flatten(1)
    raise ConfigurationError(f"Unknown pooling mode '{mode}'")


def project(
    deep_w: DeepFeatureMap,
    deep_n: DeepFeatureMap,
    shared_w: Projector,
    specific_w: Projector,
    shared_n: Projector,
    specific_n: Projector,
    pooling: str = "mean",
) -> DisentangledBundle:
    """Apply the four independent projectors and pool each token map."""
    if deep_w.data.shape != deep_n.data.shape:
        raise ContractError(
            f"Deep features differ in shape: {tuple(deep_w.data.shape)} vs {tuple(deep_n.data.shape)}"
        )
    tokens = {
        "ws": shared_w(deep_w.data),
        "wp": specific_w(deep_w.data),
        "ns": shared_n(deep_n.data),
        "np": specific_n(deep_n.data),
    }
    return DisentangledBundle(
        tokens_ws=tokens["ws"],
        tokens_wp=tokens["wp"],
        tokens_ns=tokens["ns"],
        tokens_np=tokens["np"],
        **{f"z_{k}": pool_tokens(v, pooling) for k, v in tokens.items()},
    )


class DisentangleHead(nn.Module):
    """Holds f_s^(w), f_p^(w), f_s^(n), f_p^(n)."""

    def __init__(self, dim: int, pooling: str = "mean") -> None:
        super().__init__()
        self.pooling = pooling
        self.shared_w = TokenMLP(dim)
        self.specific_w = TokenMLP(dim)
        self.shared_n = TokenMLP(dim)
        self.specific_n = TokenMLP(dim)

    def forward(self, deep_w: DeepFeatureMap, deep_n: DeepFeatureMap) -> DisentangledBundle:
        return project(
            deep_w,
            deep_n,
            self.shared_w,
            self.specific_w,
            self.shared_n,
            self.specific_n,
            pooling=self.pooling,
        )
