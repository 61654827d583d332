"""Synthetic paired-modality generator with planted shared/specific factors.

Modality-w is a smooth lesion blob under a global illumination field driven
by ``specific_w``; modality-n carries the same blob geometry plus a
high-frequency vessel texture driven by ``specific_n``. The mask depends on
``shared_code`` alone.

Shared code layout: [present, cx, cy, radius, irregularity, phase2, phase3].
Specific-w layout:  [grad_x, grad_y, bias, freq_x, freq_y, phase, cue_dim].
Specific-n layout:  4 × [angle, freq, phase] vessels, then [cue_dim].
A zero specific code renders a flat, texture-free modality.
"""

from __future__ import annotations

import logging
import time
from typing import Optional

import numpy as np

from src.data.config import GeneratorConfig
from src.data.manifest import DatasetManifest, PlantedFactors, SamplePair
from src.errors import ConfigurationError

logger = logging.getLogger(__name__)

SHARED_DIM = 7
SPECIFIC_W_DIM = 7
N_VESSELS = 4
SPECIFIC_N_DIM = 3 * N_VESSELS + 1

WLI_BASE = np.array([0.78, 0.50, 0.45])
WLI_TINT = np.array([-0.55, -1.0, -0.85])
NBI_BASE = np.array([0.40, 0.62, 0.58])
NBI_TINT = np.array([-0.35, -1.0, -0.6])
NBI_VESSEL = np.array([0.6, 1.0, 0.9])

# strongest dimming applied to one modality's lesion cue in complementary mode
MAX_CUE_DIM = 0.85


def _grid(size: int) -> tuple[np.ndarray, np.ndarray]:
    coords = np.arange(size, dtype=np.float64) + 0.5
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    return yy, xx


def lesion_geometry(
    shared_code: np.ndarray, size: int, edge_softness: float = 1.5
) -> tuple[np.ndarray, np.ndarray]:
    """Rasterise the lesion described by ``shared_code``.

    Returns:
        (mask, soft): binary uint8 H×W mask and the smooth blob in [0, 1].
    """
    if shared_code[0] <= 0:
        empty = np.zeros((size, size))
        return empty.astype(np.uint8), empty
    _, cx, cy, radius, irregularity, phase2, phase3 = shared_code
    yy, xx = _grid(size)
    dy, dx = yy - cy, xx - cx
    dist = np.hypot(dx, dy)
    theta = np.arctan2(dy, dx)
    boundary = radius * (
        1.0 + irregularity * (0.6 * np.cos(2.0 * (theta - phase2)) + 0.4 * np.cos(3.0 * (theta - phase3)))
    )
    mask = (dist <= boundary).astype(np.uint8)
    soft = 1.0 / (1.0 + np.exp(-(boundary - dist) / edge_softness))
    return mask, soft


def _illumination(specific_w: np.ndarray, size: int, strength: float) -> tuple[np.ndarray, np.ndarray]:
    grad_x, grad_y, bias, freq_x, freq_y, phase, _ = specific_w
    yy, xx = _grid(size)
    u, v = xx / size, yy / size
    field = 1.0 + strength * (grad_x * (u - 0.5) + grad_y * (v - 0.5) + 0.5 * bias)
    texture = 0.1 * strength * np.sin(2.0 * np.pi * 3.0 * (freq_x * u + freq_y * v) + np.pi * phase)
    return field, texture


def _vessels(specific_n: np.ndarray, size: int) -> np.ndarray:
    yy, xx = _grid(size)
    u, v = xx / size, yy / size
    texture = np.zeros((size, size))
    for k in range(N_VESSELS):
        angle, freq, phase = specific_n[3 * k : 3 * k + 3]
        t = np.cos(np.pi * angle) * u + np.sin(np.pi * angle) * v
        texture += np.sin(2.0 * np.pi * 12.0 * freq * t + np.pi * phase) ** 8
    return texture / N_VESSELS


def _shift(image: np.ndarray, shift: tuple[int, int]) -> np.ndarray:
    dy, dx = shift
    if dy == 0 and dx == 0:
        return image
    h, w = image.shape[:2]
    pad = max(abs(dy), abs(dx))
    padded = np.pad(image, ((pad, pad), (pad, pad), (0, 0)), mode="edge")
    return padded[pad - dy : pad - dy + h, pad - dx : pad - dx + w]


def render_pair(
    factors: PlantedFactors,
    config: GeneratorConfig,
    noise_rng: Optional[np.random.Generator] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Render (x_w, x_n, mask) from planted factors.

    Noise is added only when ``noise_rng`` is given and ``noise_std`` > 0.
    """
    size = config.image_size
    mask, soft = lesion_geometry(factors.shared_code, size, config.edge_softness)

    field, texture = _illumination(factors.specific_w, size, config.illumination_strength)
    cue_w = 1.0 - factors.specific_w[-1]
    x_w = (
        WLI_BASE[None, None, :] * field[..., None]
        + config.lesion_contrast_w * cue_w * soft[..., None] * WLI_TINT[None, None, :]
        + texture[..., None]
    )

    cue_n = 1.0 - factors.specific_n[-1]
    vessels = config.vessel_strength * _vessels(factors.specific_n, size)
    vessels = vessels * (1.0 + config.vessel_lesion_gain * cue_n * soft)
    x_n = (
        NBI_BASE[None, None, :]
        + config.lesion_contrast_n * cue_n * soft[..., None] * NBI_TINT[None, None, :]
        - vessels[..., None] * NBI_VESSEL[None, None, :]
    )
    x_n = _shift(x_n, factors.shift_n)

    if noise_rng is not None and config.noise_std > 0:
        x_w = x_w + noise_rng.normal(0.0, config.noise_std, size=x_w.shape)
        x_n = x_n + noise_rng.normal(0.0, config.noise_std, size=x_n.shape)

    x_w = np.clip(x_w, 0.0, 1.0)
    x_n = np.clip(x_n, 0.0, 1.0)
    if config.channels == 1:
        x_w = x_w.mean(axis=-1, keepdims=True)
        x_n = x_n.mean(axis=-1, keepdims=True)
    return x_w.astype(np.float32), x_n.astype(np.float32), mask


def sample_factors(rng: np.random.Generator, config: GeneratorConfig, tumor: bool) -> PlantedFactors:
    """Draw planted factors for one pair."""
    if tumor or not config.benign_empty:
        radius = rng.uniform(config.radius_min, config.radius_max)
        irregularity = rng.uniform(0.0, config.shape_irregularity)
        extent = radius * (1.0 + irregularity)
        cx, cy = rng.uniform(extent + 1.0, config.image_size - extent - 1.0, size=2)
        phase2, phase3 = rng.uniform(-np.pi, np.pi, size=2)
        shared = np.array([1.0, cx, cy, radius, irregularity, phase2, phase3])
    else:
        rng.uniform(size=6)  # keep the stream aligned across labels
        shared = np.zeros(SHARED_DIM)

    specific_w = np.concatenate([rng.uniform(-1.0, 1.0, size=SPECIFIC_W_DIM - 1), [0.0]])
    vessels = []
    for _ in range(N_VESSELS):
        angle = rng.uniform(-1.0, 1.0)
        freq = rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])
        phase = rng.uniform(-1.0, 1.0)
        vessels.extend([angle, freq, phase])
    specific_n = np.concatenate([vessels, [0.0]])

    if config.complementary:
        weak = rng.integers(0, 3)  # 0: w weak, 1: n weak, 2: both strong
        dim = rng.uniform(0.5, MAX_CUE_DIM)
        if weak == 0:
            specific_w[-1] = dim
        elif weak == 1:
            specific_n[-1] = dim

    shift = (0, 0)
    if config.misalignment_px > 0:
        m = config.misalignment_px
        shift = (int(rng.integers(-m, m + 1)), int(rng.integers(-m, m + 1)))
    return PlantedFactors(shared_code=shared, specific_w=specific_w, specific_n=specific_n, shift_n=shift)


def synthesize_dataset(
    n_pairs: int,
    seed: int,
    config: Optional[GeneratorConfig] = None,
) -> DatasetManifest:
    """Generate ``n_pairs`` synthetic pairs; deterministic given (seed, config).

    Raises:
        ConfigurationError: If ``n_pairs`` < 1 or the generator config is invalid.
    """
    config = config or GeneratorConfig()
    if n_pairs < 1:
        raise ConfigurationError(f"n_pairs must be >= 1, got {n_pairs}")
    config.validate()

    start = time.perf_counter()
    n_test = int(round(n_pairs * config.test_fraction))
    if n_test >= n_pairs:
        n_test = n_pairs - 1
    order = np.random.default_rng(seed).permutation(n_pairs)
    test_idx = set(order[:n_test].tolist())

    pairs: list[SamplePair] = []
    for i in range(n_pairs):
        rng = np.random.default_rng([seed, i])
        tumor = bool(rng.uniform() < config.tumor_fraction)
        factors = sample_factors(rng, config, tumor)
        x_w, x_n, mask = render_pair(factors, config, noise_rng=rng)
        pairs.append(
            SamplePair(
                x_w=x_w,
                x_n=x_n,
                mask=mask,
                id=f"syn_{i:05d}",
                label="tumor" if tumor else "benign",
                split="test" if i in test_idx else "train",
                factors=factors,
            )
        )

    manifest = DatasetManifest(root=None, pairs=pairs)
    logger.info(
        "[INFO] Synthesised %d pair(s) at %dpx (seed=%d) in %.2fs",
        n_pairs,
        config.image_size,
        seed,
        time.perf_counter() - start,
    )
    return manifest
