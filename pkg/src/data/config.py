"""Configuration dataclasses for synthetic generation and dataset loading."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from src.errors import ConfigurationError


@dataclass
class GeneratorConfig:
    """Knobs of the synthetic paired-modality generator.

    Radii and shifts are in pixels. The lesion boundary radius wobbles by at
    most ``shape_irregularity`` (relative) around the drawn base radius.
    """

    image_size: int = 224
    channels: int = 3
    radius_min: float = 24.0
    radius_max: float = 56.0
    shape_irregularity: float = 0.2
    edge_softness: float = 1.5
    tumor_fraction: float = 0.8
    benign_empty: bool = True
    test_fraction: float = 0.2

    # modality-w: smooth lesion plus a global illumination field
    illumination_strength: float = 0.25
    lesion_contrast_w: float = 0.35

    # modality-n: same lesion geometry plus high-frequency vessel texture
    vessel_strength: float = 0.15
    vessel_lesion_gain: float = 1.5
    lesion_contrast_n: float = 0.2

    # complementary evidence: per-sample random dimming of either modality's lesion cue
    complementary: bool = False
    noise_std: float = 0.02
    misalignment_px: int = 0

    def validate(self) -> None:
        if self.image_size < 8:
            raise ConfigurationError(f"data.image_size must be >= 8, got {self.image_size}")
        if self.channels not in (1, 3):
            raise ConfigurationError(f"data.channels must be 1 or 3, got {self.channels}")
        if self.radius_min <= 0 or self.radius_min > self.radius_max:
            raise ConfigurationError(
                f"data.radius_min/radius_max must satisfy 0 < min <= max, "
                f"got {self.radius_min}/{self.radius_max}"
            )
        if not 0.0 <= self.shape_irregularity < 1.0:
            raise ConfigurationError("data.shape_irregularity must lie in [0, 1)")
        if 2.0 * self.max_extent() >= self.image_size:
            raise ConfigurationError(
                f"Lesion radius up to {self.max_extent():.1f}px does not fit an image "
                f"of size {self.image_size}px"
            )
        for name in ("tumor_fraction", "test_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"data.{name} must lie in [0, 1], got {value}")
        if self.misalignment_px < 0 or self.misalignment_px >= self.image_size // 2:
            raise ConfigurationError(
                f"data.misalignment_px must lie in [0, image_size/2), got {self.misalignment_px}"
            )
        if self.noise_std < 0 or self.edge_softness <= 0:
            raise ConfigurationError("data.noise_std must be >= 0 and data.edge_softness > 0")

    def max_extent(self) -> float:
        return self.radius_max * (1.0 + self.shape_irregularity)

    def expected_foreground_range(self) -> tuple[float, float]:
        """Analytic bounds of the foreground fraction of a single tumor mask."""
        area = float(self.image_size**2)
        low = math.pi * (self.radius_min * (1.0 - self.shape_irregularity)) ** 2 / area
        high = math.pi * self.max_extent() ** 2 / area
        return low, high


@dataclass
class DataConfig:
    """Data section of the experiment config."""

    root: str = ""
    n_pairs: int = 200
    seed: int = 7
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)

    def validate(self) -> None:
        if self.n_pairs < 1:
            raise ConfigurationError(f"data.n_pairs must be >= 1, got {self.n_pairs}")
        self.generator.validate()
