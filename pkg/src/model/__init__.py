"""Network composition and the model factory."""

from src.model.network import ADFSegmentationNet, ModelKind, ModelOutput, SingleModalityNet, build_model

__all__ = ["ADFSegmentationNet", "ModelKind", "ModelOutput", "SingleModalityNet", "build_model"]
