"""Full align–disentangle–fuse network and single-modality baselines."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional

import torch
from torch import nn

from src.alignment.config import MMDConfig
from src.alignment.descriptors import AttentionScorer, GlobalDescriptor, concat_multiscale, global_descriptor
from src.disentangle.config import FDConfig
from src.disentangle.projectors import DisentangledBundle, DisentangleHead
from src.encoder.config import EncoderConfig
from src.encoder.vit import PatchTokenEncoder, TwoBranchEncoder
from src.errors import ConfigurationError, ContractError
from src.fusion.config import FusionConfig
from src.fusion.decoder import ProgressiveDecoder
from src.fusion.fusion import FusedFeature, FusionHead

if TYPE_CHECKING:
    from src.data.batching import Batch
    from src.experiment.config import ExperimentConfig


class ModelKind(str, Enum):
    MULTIMODAL = "multimodal"
    WLI_ONLY = "wli_only"
    NBI_ONLY = "nbi_only"

    @property
    def label(self) -> str:
        labels = {
            "multimodal": "WLI + NBI",
            "wli_only": "WLI only",
            "nbi_only": "NBI only",
        }
        return labels.get(self.value, self.value)


@dataclass
class ModelOutput:
    logits: torch.Tensor
    descriptor_w: Optional[GlobalDescriptor] = None
    descriptor_n: Optional[GlobalDescriptor] = None
    bundle: Optional[DisentangledBundle] = None
    fused: Optional[FusedFeature] = None

    @property
    def is_multimodal(self) -> bool:
        return self.bundle is not None


def _decoder(encoder: EncoderConfig, fusion: FusionConfig) -> ProgressiveDecoder:
    return ProgressiveDecoder(
        embed_dim=encoder.embed_dim,
        image_size=encoder.image_size,
        stages=fusion.decoder_stages,
        base_channels=fusion.base_channels,
        out_channels=fusion.out_channels,
    )


class ADFSegmentationNet(nn.Module):
    """Two-branch encoder → global descriptors (for L_DA) → shared/specific
    projections (for L_FD) → fusion → decoder."""

    def __init__(
        self,
        encoder: EncoderConfig,
        alignment: MMDConfig,
        disentangle: FDConfig,
        fusion: FusionConfig,
    ) -> None:
        super().__init__()
        for section in (encoder, alignment, disentangle, fusion):
            section.validate()
        self.detach_encoder = alignment.detach_encoder
        multiscale_dim = encoder.num_stages * encoder.embed_dim
        self.encoder = TwoBranchEncoder(encoder)
        self.scorer_w = AttentionScorer(multiscale_dim)
        self.scorer_n = AttentionScorer(multiscale_dim)
        self.disentangle = DisentangleHead(encoder.embed_dim, pooling=disentangle.pooling)
        self.fusion = FusionHead(encoder.embed_dim, hidden=fusion.hidden_dim, shared_bias=fusion.shared_bias)
        self.decoder = _decoder(encoder, fusion)

    def forward(self, x_w: torch.Tensor, x_n: torch.Tensor) -> ModelOutput:
        encoded = self.encoder(x_w, x_n)
        ms_w = concat_multiscale(encoded.stages_w)
        ms_n = concat_multiscale(encoded.stages_n)
        if self.detach_encoder:
            ms_w.data = ms_w.data.detach()
            ms_n.data = ms_n.data.detach()
        bundle = self.disentangle(encoded.deep_w, encoded.deep_n)
        fused = self.fusion(bundle)
        return ModelOutput(
            logits=self.decoder(fused.fused),
            descriptor_w=global_descriptor(ms_w, self.scorer_w),
            descriptor_n=global_descriptor(ms_n, self.scorer_n),
            bundle=bundle,
            fused=fused,
        )

    def predict_logits(self, batch: "Batch") -> torch.Tensor:
        return self(batch.x_w, batch.x_n).logits


class SingleModalityNet(nn.Module):
    """One encoder branch decoded directly; no alignment or disentanglement."""

    def __init__(self, modality: str, encoder: EncoderConfig, fusion: FusionConfig) -> None:
        super().__init__()
        if modality not in ("w", "n"):
            raise ConfigurationError(f"Unknown modality '{modality}'")
        encoder.validate()
        fusion.validate()
        self.modality = modality
        self.encoder = PatchTokenEncoder(encoder)
        self.decoder = _decoder(encoder, fusion)

    def forward(self, x_w: torch.Tensor, x_n: torch.Tensor) -> ModelOutput:
        if x_w.shape[0] != x_n.shape[0]:
            raise ContractError(f"Batch sizes differ between modalities: {x_w.shape[0]} vs {x_n.shape[0]}")
        _, deep = self.encoder(x_w if self.modality == "w" else x_n)
        return ModelOutput(logits=self.decoder(deep))

    def predict_logits(self, batch: "Batch") -> torch.Tensor:
        return self(batch.x_w, batch.x_n).logits


def build_model(config: "ExperimentConfig") -> nn.Module:
    """Return the network selected by ``trainer.model_kind``.

    Raises:
        ConfigurationError: If the model kind is unknown.
    """
    try:
        kind = ModelKind(config.trainer.model_kind)
    except ValueError:
        raise ConfigurationError(f"Unknown trainer.model_kind: '{config.trainer.model_kind}'") from None

    if kind == ModelKind.MULTIMODAL:
        return ADFSegmentationNet(config.encoder, config.alignment, config.disentangle, config.fusion)
    elif kind == ModelKind.WLI_ONLY:
        return SingleModalityNet("w", config.encoder, config.fusion)
    elif kind == ModelKind.NBI_ONLY:
        return SingleModalityNet("n", config.encoder, config.fusion)

    raise ConfigurationError(f"Unknown model kind: {kind}")
