"""Cosine-geometry disentanglement losses and the contrastive objective.

All losses work on pooled per-sample vectors (B, F). Norms carry an additive
epsilon so zero vectors stay finite.
"""

from __future__ import annotations

import torch

from src.disentangle.config import FDConfig
from src.disentangle.projectors import DisentangledBundle
from src.errors import ConfigurationError

EPS = 1e-8
FD_TERMS = ("align", "diff", "orth", "dacl")


def unit(x: torch.Tensor, eps: float = EPS) -> torch.Tensor:
    return x / (x.norm(dim=-1, keepdim=True) + eps)


def cosine(a: torch.Tensor, b: torch.Tensor, eps: float = EPS) -> torch.Tensor:
    """Row-wise cosine similarity, shape (B,)."""
    return (unit(a, eps) * unit(b, eps)).sum(dim=-1)


def loss_align(z_ws: torch.Tensor, z_ns: torch.Tensor) -> torch.Tensor:
    """½(1 − mean cos(z_ws, z_ns)); 0 when shared vectors coincide."""
    return 0.5 * (1.0 - cosine(z_ws, z_ns).mean())


def loss_diff(z_wp: torch.Tensor, z_np: torch.Tensor) -> torch.Tensor:
    """½(1 + mean cos(z_wp, z_np)); 0 when specific vectors are opposite."""
    return 0.5 * (1.0 + cosine(z_wp, z_np).mean())


def loss_orth(z_ws: torch.Tensor, z_wp: torch.Tensor, z_ns: torch.Tensor, z_np: torch.Tensor) -> torch.Tensor:
    """(1/2B) Σ_b [cos²(z_ws, z_wp) + cos²(z_ns, z_np)]."""
    return 0.5 * (cosine(z_ws, z_wp).pow(2) + cosine(z_ns, z_np).pow(2)).mean()


def _anchored_contrastive(
    anchor: torch.Tensor,
    positive: torch.Tensor,
    negatives: tuple[torch.Tensor, torch.Tensor],
    tau: float,
) -> torch.Tensor:
    a = unit(anchor)
    pos_sims = a @ unit(positive).T
    logits = torch.cat([pos_sims] + [a @ unit(neg).T for neg in negatives], dim=1) / tau
    pos = torch.diagonal(pos_sims) / tau
    return (torch.logsumexp(logits, dim=1) - pos).mean()


def loss_dacl(bundle: DisentangledBundle, tau: float = 0.07, symmetrize: bool = False) -> torch.Tensor:
    """Contrastive loss anchored on z_ws.

    The positive of sample b is z_ns^(b); the denominator sums over every m in
    the batch the similarities to z_ns^(m), z_wp^(m) and z_np^(m). With
    ``symmetrize`` the n-anchored mirror is averaged in.

    Raises:
        ConfigurationError: If ``tau`` <= 0.
    """
    if tau <= 0:
        raise ConfigurationError(f"Contrastive temperature must be > 0, got {tau}")
    loss = _anchored_contrastive(bundle.z_ws, bundle.z_ns, (bundle.z_wp, bundle.z_np), tau)
    if symmetrize:
        mirrored = _anchored_contrastive(bundle.z_ns, bundle.z_ws, (bundle.z_np, bundle.z_wp), tau)
        loss = 0.5 * (loss + mirrored)
    return loss


def weighted_fd(parts: dict[str, torch.Tensor | float], config: FDConfig) -> torch.Tensor | float:
    return (
        config.alpha * parts["align"]
        + config.beta * parts["diff"]
        + config.gamma * parts["orth"]
        + config.delta * parts["dacl"]
    )


def loss_fd(bundle: DisentangledBundle, config: FDConfig | None = None) -> tuple[torch.Tensor, dict[str, torch.Tensor]]:
    """α·Align + β·Diff + γ·Orth + δ·DACL, with the four parts returned."""
    config = config or FDConfig()
    parts = {
        "align": loss_align(bundle.z_ws, bundle.z_ns),
        "diff": loss_diff(bundle.z_wp, bundle.z_np),
        "orth": loss_orth(bundle.z_ws, bundle.z_wp, bundle.z_ns, bundle.z_np),
        "dacl": loss_dacl(bundle, config.tau, config.symmetrize_dacl),
    }
    return weighted_fd(parts, config), parts
