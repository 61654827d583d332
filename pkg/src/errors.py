"""Exception hierarchy shared by every adfseg package."""

from __future__ import annotations


class AdfError(Exception):
    """Base class for all adfseg errors."""


class ConfigurationError(AdfError, ValueError):
    """A configuration value or key is invalid."""


class ContractError(AdfError, ValueError):
    """A call violated a shape or value contract."""


class ManifestError(AdfError, FileNotFoundError):
    """A dataset directory or manifest is incomplete or inconsistent."""


class CheckpointError(AdfError, RuntimeError):
    """A checkpoint is missing, corrupt, or does not match the config."""


class NonFiniteLossError(AdfError, RuntimeError):
    """A loss term became NaN or infinite during training."""

    def __init__(self, term: str, value: float, epoch: int, step: int) -> None:
        self.term = term
        self.value = value
        super().__init__(
            f"Loss term '{term}' is not finite ({value}) at epoch {epoch}, step {step}"
        )
