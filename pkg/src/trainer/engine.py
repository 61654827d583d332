"""Training loop: total objective, progressive weighting, checkpoints, run records."""

from __future__ import annotations

import dataclasses
import logging
import shutil
import time
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import torch
from torch import nn

from src.alignment.mmd import median_bandwidth, mmd_loss
from src.data.batching import Batch, make_batches
from src.data.manifest import DatasetManifest
from src.disentangle.config import FDConfig
from src.disentangle.losses import FD_TERMS, loss_fd
from src.errors import CheckpointError, ConfigurationError, NonFiniteLossError
from src.experiment.runs import Run, RunStatus
from src.model.network import ModelOutput, build_model
from src.trainer.checkpoint import load_checkpoint, save_checkpoint
from src.trainer.config import LossWeights
from src.trainer.losses import seg_losses
from src.trainer.report import LossReport, TrainingLog
from src.trainer.reproducibility import deterministic_requested, enable_deterministic, resolve_device, seed_everything

if TYPE_CHECKING:
    from src.experiment.config import ExperimentConfig

logger = logging.getLogger(__name__)

LAST_CHECKPOINT = "last.pt"


def effective_fd_config(config: "ExperimentConfig") -> FDConfig:
    """FD weights with ablated components forced to zero."""
    ablation = config.trainer.ablation
    fd = config.disentangle
    return dataclasses.replace(
        fd,
        alpha=fd.alpha if ablation.pd else 0.0,
        beta=fd.beta if ablation.pd else 0.0,
        gamma=fd.gamma if ablation.pd else 0.0,
        delta=fd.delta if ablation.dacl else 0.0,
    )


class Trainer:
    """Owns the model parameters and the optimizer; one step at a time."""

    def __init__(self, model: nn.Module, config: "ExperimentConfig", device: torch.device | str = "cpu") -> None:
        self.device = torch.device(device)
        self.model = model.to(self.device)
        self.config = config
        self.optimizer = torch.optim.Adam(self.model.parameters(), lr=config.trainer.lr)
        self.sigma: Optional[float] = None if config.alignment.is_auto else float(config.alignment.sigma)
        self.fd_config = effective_fd_config(config)

    def _bandwidth(self, g_w: torch.Tensor, g_n: torch.Tensor) -> float:
        if self.sigma is None:
            self.sigma = median_bandwidth(g_w.detach(), g_n.detach())
            logger.info("[INFO] MMD bandwidth fixed at %.6g (median heuristic)", self.sigma)
        return self.sigma

    def compute_terms(self, output: ModelOutput, mask: torch.Tensor) -> dict[str, torch.Tensor]:
        """Every reported loss term; single-modality models report zeros for DA and FD."""
        ce, dice = seg_losses(output.logits, mask, smooth=self.config.trainer.dice_smooth)
        zero = output.logits.new_zeros(())
        terms = {"da": zero, **{name: zero for name in FD_TERMS}, "fd": zero, "ce": ce, "dice": dice}
        if output.is_multimodal:
            g_w = output.descriptor_w.global_feature
            g_n = output.descriptor_n.global_feature
            terms["da"] = mmd_loss(g_w, g_n, self._bandwidth(g_w, g_n))
            fd, parts = loss_fd(output.bundle, self.fd_config)
            terms.update(parts)
            terms["fd"] = fd
        return terms

    def train_step(self, batch: Batch, weights: LossWeights, epoch: int = 1, step: int = 1) -> LossReport:
        """One optimizer step on ``batch``.

        Raises:
            NonFiniteLossError: If any loss term is NaN or infinite; no update is applied.
        """
        if len(batch) < 2:
            raise ConfigurationError(f"Training batches need at least 2 pairs, got {len(batch)}")
        self.model.train()
        output = self.model(batch.x_w, batch.x_n)
        terms = self.compute_terms(output, batch.mask)
        for name, value in terms.items():
            if not torch.isfinite(value):
                raise NonFiniteLossError(name, float(value), epoch, step)

        total = (
            weights.lambda1 * terms["da"]
            + weights.lambda2 * terms["fd"]
            + weights.lambda3 * terms["ce"]
            + weights.lambda4 * terms["dice"]
        )
        self.optimizer.zero_grad(set_to_none=True)
        total.backward()
        self.optimizer.step()

        report = LossReport(
            epoch=epoch,
            step=step,
            **{name: float(value.detach()) for name, value in terms.items()},
            total=float(total.detach()),
            lambda1=weights.lambda1,
            lambda2=weights.lambda2,
            lambda3=weights.lambda3,
            lambda4=weights.lambda4,
        )
        logger.debug(
            "epoch %d step %d total=%.5f da=%.5f fd=%.5f ce=%.5f dice=%.5f",
            epoch, step, report.total, report.da, report.fd, report.ce, report.dice,
        )
        return report


@dataclass
class FitResult:
    run: Run
    checkpoint_path: Path
    log_path: Path
    epoch_reports: list[LossReport]
    sigma: Optional[float]


def _resume(trainer: Trainer, path: Path, config: "ExperimentConfig") -> int:
    state = load_checkpoint(path)
    if state.config_hash != config.config_hash():
        raise CheckpointError(
            f"Checkpoint {path} was written with config {state.config_hash}, "
            f"current config is {config.config_hash()}"
        )
    try:
        trainer.model.load_state_dict(state.model_state)
        trainer.optimizer.load_state_dict(state.optimizer_state)
    except (RuntimeError, ValueError, KeyError) as exc:
        raise CheckpointError(f"Checkpoint {path} does not fit the model: {exc}") from exc
    trainer.sigma = state.sigma if state.sigma is not None else trainer.sigma
    if state.rng_state is not None:
        torch.set_rng_state(state.rng_state)
    logger.info("[INFO] Resumed from %s at epoch %d", path, state.epoch)
    return state.epoch + 1


def fit(
    manifest: DatasetManifest,
    config: "ExperimentConfig",
    run_dir: str | Path,
    resume_from: Optional[str | Path] = None,
) -> FitResult:
    """Train for ``trainer.epochs`` epochs on the manifest's train split.

    λ2 follows the progressive schedule per epoch. Every epoch writes its
    step rows and a mean epoch row to ``train_log.csv``; checkpoints are
    written every ``checkpoint_every`` epochs and at the last epoch.

    Raises:
        ConfigurationError: If the train split cannot fill a single batch.
        CheckpointError: If ``resume_from`` is missing, corrupt or was written
            with a different config.
        NonFiniteLossError: If a loss term diverges.
    """
    config.validate()
    train_cfg = config.trainer
    seed_everything(train_cfg.seed)
    if deterministic_requested():
        enable_deterministic()
    device = resolve_device(train_cfg.device)

    train_split = manifest.split("train")
    if len(train_split) < train_cfg.batch_size:
        raise ConfigurationError(
            f"Train split has {len(train_split)} pair(s), fewer than trainer.batch_size={train_cfg.batch_size}"
        )
    steps_per_epoch = len(train_split) // train_cfg.batch_size

    trainer = Trainer(build_model(config), config, device)
    run = Run.open(run_dir)
    config_hash = config.config_hash()

    start_epoch = 1
    if resume_from is not None:
        if not run.status.can_resume():
            raise CheckpointError(f"Run '{run.name}' is already {run.status.value}; resume into a new run folder")
        start_epoch = _resume(trainer, Path(resume_from), config)
    log = TrainingLog(run.log_path, config_hash, keep_before_epoch=start_epoch if resume_from is not None else None)
    config.save(run.folder / "config.yaml")

    run.status = RunStatus.TRAINING
    run.config_hash = config_hash
    run.model_kind = train_cfg.model_kind
    run.epochs_total = train_cfg.epochs
    run.epochs_completed = start_epoch - 1
    run.error_message = ""
    run.save()

    reports: list[LossReport] = []
    last_path = run.checkpoints_dir / LAST_CHECKPOINT
    logger.info(
        "[INFO] Training %s for epochs %d..%d (%d step(s)/epoch, config %s, device %s)",
        train_cfg.model_kind, start_epoch, train_cfg.epochs, steps_per_epoch, config_hash, device,
    )
    try:
        for epoch in range(start_epoch, train_cfg.epochs + 1):
            start = time.perf_counter()
            weights = LossWeights.for_epoch(epoch, config)
            step_reports = []
            batches = make_batches(train_split, train_cfg.batch_size, shuffle_seed=train_cfg.seed + epoch, train=True)
            for index, batch in enumerate(batches):
                step = (epoch - 1) * steps_per_epoch + index + 1
                report = trainer.train_step(batch.to(device), weights, epoch, step)
                log.write_step(report)
                step_reports.append(report)
            epoch_report = LossReport.mean(step_reports)
            log.write_epoch(epoch_report)
            reports.append(epoch_report)
            logger.info(
                "[INFO] Epoch %d/%d in %.2fs: total=%.4f ce=%.4f dice=%.4f da=%.4f fd=%.4f lambda2=%.4f",
                epoch, train_cfg.epochs, time.perf_counter() - start, epoch_report.total,
                epoch_report.ce, epoch_report.dice, epoch_report.da, epoch_report.fd, weights.lambda2,
            )

            if epoch % train_cfg.checkpoint_every == 0 or epoch == train_cfg.epochs:
                path = save_checkpoint(
                    run.checkpoint_path(epoch), trainer.model, trainer.optimizer, epoch, config, trainer.sigma
                )
                shutil.copyfile(path, last_path)
                run.last_checkpoint = str(path)
            run.epochs_completed = epoch
            run.save()
    except Exception as exc:
        logger.exception("Training run %s aborted", run.name)
        run.status = RunStatus.ERROR
        run.error_message = str(exc)
        run.save()
        raise

    run.status = RunStatus.DONE
    run.save()
    return FitResult(run=run, checkpoint_path=last_path, log_path=run.log_path, epoch_reports=reports, sigma=trainer.sigma)
