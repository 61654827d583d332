"""Experiment configuration: one YAML file with a section per package.

Unknown keys are rejected at any depth, naming the dotted key. Overrides
use ``section.key=value`` with the value parsed as a YAML scalar.
"""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Union, get_type_hints

import yaml

from src.alignment.config import MMDConfig
from src.data.config import DataConfig
from src.disentangle.config import FDConfig
from src.encoder.config import EncoderConfig
from src.errors import ConfigurationError
from src.fusion.config import FusionConfig
from src.trainer.config import TrainConfig

logger = logging.getLogger(__name__)

HASH_LENGTH = 12
ARGMAX = "argmax"


@dataclass
class MetricsConfig:
    """``threshold`` is ``"argmax"`` or a foreground-probability cut in (0, 1)."""

    threshold: Union[str, float] = ARGMAX
    dump_embeddings: bool = True
    eval_batch_size: int = 8

    def validate(self) -> None:
        if isinstance(self.threshold, str):
            if self.threshold != ARGMAX:
                raise ConfigurationError(f"metrics.threshold must be 'argmax' or a float, got '{self.threshold}'")
        elif not 0.0 < float(self.threshold) < 1.0:
            raise ConfigurationError(f"metrics.threshold must lie in (0, 1), got {self.threshold}")
        if self.eval_batch_size < 1:
            raise ConfigurationError(f"metrics.eval_batch_size must be >= 1, got {self.eval_batch_size}")


@dataclass
class ExperimentConfig:
    data: DataConfig = field(default_factory=DataConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    alignment: MMDConfig = field(default_factory=MMDConfig)
    disentangle: FDConfig = field(default_factory=FDConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    trainer: TrainConfig = field(default_factory=TrainConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)

    def validate(self) -> None:
        for section in dataclasses.fields(self):
            getattr(self, section.name).validate()
        generator = self.data.generator
        if generator.image_size != self.encoder.image_size:
            raise ConfigurationError(
                f"data.generator.image_size ({generator.image_size}) must equal "
                f"encoder.image_size ({self.encoder.image_size})"
            )
        if generator.channels != self.encoder.in_channels:
            raise ConfigurationError(
                f"data.generator.channels ({generator.channels}) must equal "
                f"encoder.in_channels ({self.encoder.in_channels})"
            )

    # ── Serialisation ─────────────────────────────────────────────────────

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        config = _build(cls, data or {}, prefix="")
        config.validate()
        return config

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"Config file not found: {path}")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"Config file {path} is not valid YAML: {exc}") from exc
        if data is not None and not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must contain a mapping at the top level")
        config = cls.from_dict(data or {})
        logger.info("[INFO] Loaded config %s (hash %s)", path, config.config_hash())
        return config

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(yaml.safe_dump(self.to_dict(), sort_keys=False), encoding="utf-8")
        return path

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:HASH_LENGTH]

    def with_overrides(self, overrides: Iterable[str]) -> "ExperimentConfig":
        """Return a copy with ``section.key=value`` assignments applied."""
        values: dict[str, Any] = {}
        for item in overrides:
            key, sep, raw = item.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ConfigurationError(f"Override must look like section.key=value, got '{item}'")
            values[key] = yaml.safe_load(raw) if raw.strip() else ""
        return self.with_values(values)

    def with_values(self, values: dict[str, Any]) -> "ExperimentConfig":
        """Return a copy with dotted keys set to already-typed values."""
        data = copy.deepcopy(self.to_dict())
        for key, value in values.items():
            node = data
            parts = key.split(".")
            for depth, part in enumerate(parts):
                if not isinstance(node, dict) or part not in node:
                    raise ConfigurationError(f"Unknown config key: '{'.'.join(parts[: depth + 1])}'")
                if depth == len(parts) - 1:
                    if isinstance(node[part], dict):
                        raise ConfigurationError(f"Config key '{key}' is a section, not a value")
                    node[part] = value
                else:
                    node = node[part]
        return type(self).from_dict(data)


def _coerce(key: str, hint: Any, value: Any) -> Any:
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"Config key '{key}' expects true/false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"Config key '{key}' expects an integer, got {value!r}")
        return value
    if hint is float:
        # PyYAML reads "1e-4" as a string
        if isinstance(value, bool):
            raise ConfigurationError(f"Config key '{key}' expects a number, got {value!r}")
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"Config key '{key}' expects a number, got {value!r}") from None
    if hint is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"Config key '{key}' expects a string, got {value!r}")
        return value
    # Union[str, float]: numeric strings become floats, anything else stays a string
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise ConfigurationError(f"Config key '{key}' has an unsupported value {value!r}")


def _build(cls: type, data: Any, prefix: str) -> Any:
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config section '{prefix or '<root>'}' must be a mapping")
    hints = get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigurationError(f"Unknown config key: '{prefix}{key}'")
    kwargs: dict[str, Any] = {}
    for name, value in data.items():
        hint = hints[name]
        dotted = f"{prefix}{name}"
        if dataclasses.is_dataclass(hint):
            kwargs[name] = _build(hint, value or {}, prefix=f"{dotted}.")
        else:
            kwargs[name] = _coerce(dotted, hint, value)
    return cls(**kwargs)
