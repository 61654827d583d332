"""Configuration for multi-scale distribution alignment."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from src.errors import ConfigurationError

AUTO = "auto"


@dataclass
class MMDConfig:
    """``sigma`` is either ``"auto"`` (median heuristic on the first training
    batch, then frozen) or a fixed positive bandwidth."""

    sigma: Union[str, float] = AUTO
    lambda_da: float = 1e-4
    detach_encoder: bool = False  # L_DA then only reaches the attention scorers

    @property
    def is_auto(self) -> bool:
        return isinstance(self.sigma, str)

    def validate(self) -> None:
        if isinstance(self.sigma, str):
            if self.sigma != AUTO:
                raise ConfigurationError(f"alignment.sigma must be 'auto' or a float, got '{self.sigma}'")
        elif float(self.sigma) <= 0:
            raise ConfigurationError(f"alignment.sigma must be > 0, got {self.sigma}")
        if self.lambda_da < 0:
            raise ConfigurationError(f"alignment.lambda_da must be >= 0, got {self.lambda_da}")
