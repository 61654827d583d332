"""Gaussian-kernel maximum mean discrepancy between global descriptors."""

from __future__ import annotations

import logging

import torch

from src.errors import ConfigurationError, ContractError

logger = logging.getLogger(__name__)


def _squared_distances(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    # explicit differences keep the gradient finite at zero distance
    return (a.unsqueeze(1) - b.unsqueeze(0)).pow(2).sum(-1)


def gaussian_kernel(a: torch.Tensor, b: torch.Tensor, sigma: float) -> torch.Tensor:
    """(B_a, B_b) matrix of exp(-‖a_i - b_j‖² / 2σ²)."""
    return torch.exp(-_squared_distances(a, b) / (2.0 * sigma**2))


def mmd_loss(g_w: torch.Tensor, g_n: torch.Tensor, sigma: float) -> torch.Tensor:
    """Biased (V-statistic) MMD estimate, diagonal terms included.

    Raises:
        ContractError: If B < 2 or the feature dims differ.
        ConfigurationError: If ``sigma`` <= 0.
    """
    if g_w.ndim != 2 or g_n.ndim != 2:
        raise ContractError(f"Expected (B, F) descriptors, got {tuple(g_w.shape)} and {tuple(g_n.shape)}")
    if g_w.shape[0] < 2 or g_n.shape[0] < 2:
        raise ContractError(f"MMD needs at least 2 samples per modality, got {g_w.shape[0]} and {g_n.shape[0]}")
    if g_w.shape[1] != g_n.shape[1]:
        raise ContractError(f"Feature dims differ: {g_w.shape[1]} vs {g_n.shape[1]}")
    if sigma <= 0:
        raise ConfigurationError(f"MMD bandwidth must be > 0, got {sigma}")
    k_ww = gaussian_kernel(g_w, g_w, sigma).mean()
    k_nn = gaussian_kernel(g_n, g_n, sigma).mean()
    k_wn = gaussian_kernel(g_w, g_n, sigma).mean()
    return k_ww + k_nn - 2.0 * k_wn


def median_bandwidth(g_w: torch.Tensor, g_n: torch.Tensor, fallback: float = 1.0) -> float:
    """Median pairwise distance over the pooled descriptors (off-diagonal)."""
    pooled = torch.cat([g_w, g_n], dim=0).detach().double()
    dist = _squared_distances(pooled, pooled).clamp_min(0).sqrt()
    n = pooled.shape[0]
    off_diag = dist[~torch.eye(n, dtype=torch.bool, device=dist.device)]
    sigma = float(off_diag.median()) if off_diag.numel() else 0.0
    if not sigma > 0 or sigma != sigma:
        logger.warning("Median bandwidth heuristic degenerate (%.3g); using %.3g", sigma, fallback)
        return fallback
    return sigma
