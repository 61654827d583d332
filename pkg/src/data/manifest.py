"""Sample and manifest data model.

A manifest is the in-memory dataset: a list of paired samples, each tagged
with its split and class label. On disk it is stored as ``manifest.json``
next to the image folders:
  - manifest.json            ids, splits, class labels, statistics
  - <split>/images_w/<id>.png
  - <split>/images_n/<id>.png
  - <split>/masks/<id>.png
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from src.errors import ManifestError

logger = logging.getLogger(__name__)

SPLITS = ("train", "test")
LABELS = ("benign", "tumor")
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class PlantedFactors:
    """Latent codes a synthetic pair was rendered from.

    ``shared_code`` alone determines the lesion geometry (and therefore the
    mask); the specific codes only touch their own modality.
    """

    shared_code: np.ndarray
    specific_w: np.ndarray
    specific_n: np.ndarray
    shift_n: tuple[int, int] = (0, 0)

    def to_dict(self) -> dict:
        return {
            "shared_code": self.shared_code.tolist(),
            "specific_w": self.specific_w.tolist(),
            "specific_n": self.specific_n.tolist(),
            "shift_n": list(self.shift_n),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlantedFactors":
        return cls(
            shared_code=np.asarray(data["shared_code"], dtype=np.float64),
            specific_w=np.asarray(data["specific_w"], dtype=np.float64),
            specific_n=np.asarray(data["specific_n"], dtype=np.float64),
            shift_n=tuple(data.get("shift_n", (0, 0))),
        )


@dataclass
class SamplePair:
    """One paired sample: H×W×C images in [0, 1] and a binary H×W mask."""

    x_w: np.ndarray
    x_n: np.ndarray
    mask: np.ndarray
    id: str
    label: str = "tumor"
    split: str = "train"
    factors: Optional[PlantedFactors] = None

    def __post_init__(self) -> None:
        if self.x_w.shape[:2] != self.x_n.shape[:2]:
            raise ManifestError(
                f"Pair '{self.id}': modality sizes differ "
                f"({self.x_w.shape[:2]} vs {self.x_n.shape[:2]})"
            )
        if self.mask.shape != self.x_w.shape[:2]:
            raise ManifestError(f"Pair '{self.id}': mask shape {self.mask.shape} does not match images")
        if self.split not in SPLITS:
            raise ManifestError(f"Pair '{self.id}': unknown split '{self.split}'")

    @property
    def size(self) -> tuple[int, int]:
        return self.x_w.shape[0], self.x_w.shape[1]

    @property
    def foreground_fraction(self) -> float:
        return float(self.mask.mean())


@dataclass
class DatasetManifest:
    """All pairs of a dataset, across splits."""

    root: Optional[Path] = None
    pairs: list[SamplePair] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.validate()

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[SamplePair]:
        return iter(self.pairs)

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.pairs]

    def validate(self) -> None:
        """Ids must be unique, which also keeps train and test disjoint."""
        counts = Counter(self.ids)
        dupes = sorted(i for i, c in counts.items() if c > 1)
        if dupes:
            raise ManifestError(f"Duplicate sample ids across the manifest: {', '.join(dupes)}")

    def split(self, name: str) -> "DatasetManifest":
        if name not in SPLITS:
            raise ManifestError(f"Unknown split '{name}'")
        return DatasetManifest(root=self.root, pairs=[p for p in self.pairs if p.split == name])

    def get(self, sample_id: str) -> SamplePair:
        for pair in self.pairs:
            if pair.id == sample_id:
                return pair
        raise ManifestError(f"No pair with id '{sample_id}'")

    def statistics(self) -> dict[str, dict[str, int]]:
        """Pair counts per split and class label."""
        stats: dict[str, dict[str, int]] = {s: {lbl: 0 for lbl in LABELS} for s in SPLITS}
        for pair in self.pairs:
            stats[pair.split][pair.label] = stats[pair.split].get(pair.label, 0) + 1
        return stats

    def to_index(self, config_hash: str = "") -> dict:
        return {
            "config_hash": config_hash,
            "pairs": [
                {
                    "id": p.id,
                    "split": p.split,
                    "label": p.label,
                    **({"factors": p.factors.to_dict()} if p.factors is not None else {}),
                }
                for p in self.pairs
            ],
            "statistics": self.statistics(),
        }

    def save_index(self, root: Path, config_hash: str = "") -> Path:
        """Persist ids, splits, labels and the generating config hash to ``manifest.json``."""
        root.mkdir(parents=True, exist_ok=True)
        path = root / MANIFEST_NAME
        path.write_text(json.dumps(self.to_index(config_hash), indent=2), encoding="utf-8")
        logger.debug("Saved manifest index: %s", path)
        return path

    @staticmethod
    def load_index(root: Path) -> dict[str, dict]:
        """Return ``{id: entry}`` from ``manifest.json``, or {} if absent."""
        path = root / MANIFEST_NAME
        if not path.exists():
            return {}
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ManifestError(f"Corrupt manifest index {path}: {exc}") from exc
        return {entry["id"]: entry for entry in data.get("pairs", [])}
