"""Reading and writing paired datasets in the on-disk directory layout.

Layout: ``root/{train,test}/{images_w,images_n,masks}/<id>.png`` plus an
optional ``root/manifest.json`` carrying class labels and planted factors.
"""

from __future__ import annotations

import logging
import time
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from src.data.manifest import SPLITS, DatasetManifest, PlantedFactors, SamplePair
from src.errors import ManifestError

logger = logging.getLogger(__name__)

IMAGE_DIRS = ("images_w", "images_n", "masks")
MASK_THRESHOLD = 0.5


def _to_uint8(image: np.ndarray) -> np.ndarray:
    return np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)


def _read_image(path: Path, resize: Optional[tuple[int, int]], channels: int) -> np.ndarray:
    with Image.open(path) as img:
        img = img.convert("RGB" if channels == 3 else "L")
        if resize is not None and img.size != (resize[1], resize[0]):
            img = img.resize((resize[1], resize[0]), Image.Resampling.BILINEAR)
        data = np.asarray(img, dtype=np.float32) / 255.0
    if data.ndim == 2:
        data = data[..., None]
    return data


def _read_mask(path: Path, resize: Optional[tuple[int, int]]) -> np.ndarray:
    with Image.open(path) as img:
        img = img.convert("L")
        if resize is not None and img.size != (resize[1], resize[0]):
            img = img.resize((resize[1], resize[0]), Image.Resampling.NEAREST)
        raw = np.asarray(img, dtype=np.float32) / 255.0
    if np.any((raw > 0.0) & (raw < 1.0)):
        logger.warning("Mask %s is not binary; forcing binarisation at %.2f", path.name, MASK_THRESHOLD)
    return (raw >= MASK_THRESHOLD).astype(np.uint8)


def load_directory(
    root: str | Path,
    resize: Optional[tuple[int, int]] = (224, 224),
    channels: int = 3,
) -> DatasetManifest:
    """Load every split found under ``root``.

    Args:
        root: Dataset root in the layout described in the module docstring.
        resize: Target (H, W); ``None`` keeps the stored size.
        channels: 3 for RGB, 1 for grayscale.

    Returns:
        DatasetManifest with all pairs; labels come from ``manifest.json`` when
        present, otherwise ``tumor`` for a nonempty mask and ``benign`` else.

    Raises:
        ManifestError: If the root is missing or an id lacks a counterpart file.
    """
    root = Path(root)
    if not root.is_dir():
        raise ManifestError(f"Dataset root not found: {root}")

    start = time.perf_counter()
    index = DatasetManifest.load_index(root)
    pairs: list[SamplePair] = []
    for split in SPLITS:
        split_dir = root / split
        if not split_dir.is_dir():
            continue
        ids: set[str] = set()
        for sub in IMAGE_DIRS:
            ids |= {p.stem for p in (split_dir / sub).glob("*.png")}
        for sample_id in sorted(ids):
            paths = {sub: split_dir / sub / f"{sample_id}.png" for sub in IMAGE_DIRS}
            missing = [sub for sub, p in paths.items() if not p.exists()]
            if missing:
                raise ManifestError(
                    f"Sample '{sample_id}' ({split}) is missing: {', '.join(missing)}"
                )
            mask = _read_mask(paths["masks"], resize)
            entry = index.get(sample_id, {})
            factors = PlantedFactors.from_dict(entry["factors"]) if "factors" in entry else None
            pairs.append(
                SamplePair(
                    x_w=_read_image(paths["images_w"], resize, channels),
                    x_n=_read_image(paths["images_n"], resize, channels),
                    mask=mask,
                    id=sample_id,
                    label=entry.get("label", "tumor" if mask.any() else "benign"),
                    split=split,
                    factors=factors,
                )
            )

    if not pairs:
        raise ManifestError(f"No samples found under {root}")
    manifest = DatasetManifest(root=root, pairs=pairs)
    logger.info("[INFO] Loaded %d pair(s) from %s in %.2fs", len(pairs), root, time.perf_counter() - start)
    return manifest


def save_directory(manifest: DatasetManifest, root: str | Path, config_hash: str = "") -> Path:
    """Write ``manifest`` as lossless 8-bit PNGs plus ``manifest.json``."""
    root = Path(root)
    for pair in manifest:
        split_dir = root / pair.split
        for sub in IMAGE_DIRS:
            (split_dir / sub).mkdir(parents=True, exist_ok=True)
        for sub, image in (("images_w", pair.x_w), ("images_n", pair.x_n)):
            data = _to_uint8(image)
            if data.shape[-1] == 1:
                data = data[..., 0]
            Image.fromarray(data).save(split_dir / sub / f"{pair.id}.png")
        Image.fromarray(pair.mask.astype(np.uint8) * 255).save(split_dir / "masks" / f"{pair.id}.png")
    manifest.save_index(root, config_hash)
    manifest.root = root
    logger.info("[INFO] Wrote %d pair(s) to %s", len(manifest), root)
    return root
