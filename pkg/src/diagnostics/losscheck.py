"""Self-checks for every loss and metric against the explicit-loop oracles.

Runs without a dataset or a trained model. Each check returns a
``CheckResult``; the CLI prints them as a pass/fail table.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
import torch

from src.alignment.descriptors import (
    AttentionScorer,
    MultiScaleFeature,
    attention_pool,
    concat_multiscale,
    global_average,
    global_descriptor,
)
from src.alignment.mmd import mmd_loss
from src.diagnostics import oracles
from src.disentangle.config import FDConfig
from src.disentangle.losses import loss_align, loss_dacl, loss_diff, loss_fd, loss_orth, weighted_fd
from src.disentangle.projectors import DisentangledBundle, pool_tokens
from src.encoder.types import TokenFeatureMap
from src.metrics.segmentation import confusion, metrics_from_counts
from src.trainer.losses import seg_losses
from src.trainer.schedule import lambda2_schedule

logger = logging.getLogger(__name__)

TOLERANCE = 1e-6
GRAD_EPS = 1e-4
GRAD_RTOL = 1e-3


@dataclass(frozen=True)
class CheckResult:
    id: str
    title: str
    details: str
    passed: bool
    severity: str = "error"  # "error" | "warning"


def _rand(gen: torch.Generator, *shape: int) -> torch.Tensor:
    return torch.randn(*shape, generator=gen, dtype=torch.float64)


def _bundle(gen: torch.Generator, batch: int, dim: int) -> DisentangledBundle:
    return DisentangledBundle.from_vectors(*(_rand(gen, batch, dim) for _ in range(4)))


def _max_error(pairs: list[tuple[float, float]]) -> float:
    return max(abs(a - b) for a, b in pairs)


def _oracle_result(check_id: str, title: str, pairs: list[tuple[float, float]], tol: float = TOLERANCE) -> CheckResult:
    err = _max_error(pairs)
    return CheckResult(
        id=check_id,
        title=title,
        details=f"{len(pairs)} case(s), max abs error {err:.3e} (tolerance {tol:.0e})",
        passed=err <= tol,
    )


# ── Alignment ──────────────────────────────────────────────────────────────


def check_descriptors(gen: torch.Generator, trials: int) -> list[CheckResult]:
    results: list[CheckResult] = []

    maps = [TokenFeatureMap(_rand(gen, 2, 4, 8), stage=i + 1, modality="w") for i in range(3)]
    cat = concat_multiscale(maps)
    exact = all(torch.equal(cat.data[..., i * 8 : (i + 1) * 8], m.data) for i, m in enumerate(maps))
    results.append(
        CheckResult("concat_multiscale", "Multi-scale concatenation", f"shape {tuple(cat.data.shape)}, slices exact", exact)
    )

    avg_pairs, attn_pairs, identity_ok = [], [], True
    for _ in range(trials):
        f = MultiScaleFeature(_rand(gen, 2, 5, 6), modality="w", num_stages=1)
        for got_row, want_row in zip(global_average(f).tolist(), oracles.global_average_oracle(f.data)):
            avg_pairs.extend(zip(got_row, want_row))
        scorer = AttentionScorer(6).double()
        weighted, attention = attention_pool(f, scorer)
        want_w, want_a = oracles.attention_pool_oracle(f.data, scorer(f.data))
        for got_row, want_row in zip(weighted.tolist() + attention.tolist(), want_w + want_a):
            attn_pairs.extend(zip(got_row, want_row))
        desc = global_descriptor(f, scorer)
        identity_ok &= bool(torch.equal(desc.global_feature, desc.avg + desc.weighted))
    results.append(_oracle_result("global_average", "Global average pooling vs loop oracle", avg_pairs))
    results.append(_oracle_result("attention_pool", "Attention pooling vs softmax loop oracle", attn_pairs))
    results.append(
        CheckResult("global_descriptor", "Global descriptor = avg + weighted", "exact on all trials", identity_ok)
    )
    return results


def check_mmd(gen: torch.Generator, trials: int) -> list[CheckResult]:
    pairs, sym = [], []
    for _ in range(trials):
        g_w, g_n = _rand(gen, 3, 4), _rand(gen, 4, 4)
        sigma = float(torch.rand((), generator=gen, dtype=torch.float64)) * 2.0 + 0.5
        got = float(mmd_loss(g_w, g_n, sigma))
        pairs.append((got, oracles.mmd_oracle(g_w, g_n, sigma)))
        sym.append((got, float(mmd_loss(g_n, g_w, sigma))))
    g = _rand(gen, 4, 6)
    hand = float(mmd_loss(torch.zeros(2, 1, dtype=torch.float64), torch.ones(2, 1, dtype=torch.float64), 1.0))
    return [
        _oracle_result("mmd_oracle", "MMD vs triple-sum loop oracle", pairs),
        _oracle_result("mmd_symmetry", "MMD symmetric in its arguments", sym, tol=1e-7),
        _oracle_result("mmd_identical", "MMD of identical descriptors is zero", [(float(mmd_loss(g, g, 1.0)), 0.0)], 1e-7),
        _oracle_result("mmd_hand", "MMD two-point hand case", [(hand, 2.0 - 2.0 * math.exp(-0.5))]),
    ]


# ── Disentanglement ────────────────────────────────────────────────────────


def check_disentangle(gen: torch.Generator, trials: int) -> list[CheckResult]:
    align, diff, orth, dacl, fd, pooled = [], [], [], [], [], []
    config = FDConfig()
    for _ in range(trials):
        b = _bundle(gen, 2, 8)
        align.append((float(loss_align(b.z_ws, b.z_ns)), oracles.align_oracle(b.z_ws, b.z_ns)))
        diff.append((float(loss_diff(b.z_wp, b.z_np)), oracles.diff_oracle(b.z_wp, b.z_np)))
        orth.append((float(loss_orth(b.z_ws, b.z_wp, b.z_ns, b.z_np)), oracles.orth_oracle(b.z_ws, b.z_wp, b.z_ns, b.z_np)))
        dacl.append((float(loss_dacl(b, config.tau)), oracles.dacl_oracle(b.z_ws, b.z_wp, b.z_ns, b.z_np, config.tau)))
        total, _ = loss_fd(b, config)
        fd.append(
            (
                float(total),
                oracles.fd_oracle(
                    b.z_ws, b.z_wp, b.z_ns, b.z_np,
                    config.alpha, config.beta, config.gamma, config.delta, config.tau,
                ),
            )
        )
        tokens = _rand(gen, 2, 5, 8)
        for got_row, want_row in zip(pool_tokens(tokens).tolist(), oracles.global_average_oracle(tokens)):
            pooled.extend(zip(got_row, want_row))

    e = torch.eye(4, dtype=torch.float64)
    x = _rand(gen, 2, 4)
    ortho = DisentangledBundle.from_vectors(e[0:1], e[1:2], e[2:3], e[3:4])
    boundary = [
        (float(loss_align(x, x)), 0.0),
        (float(loss_align(x, -x)), 1.0),
        (float(loss_diff(x, -x)), 0.0),
        (float(loss_diff(x, x)), 1.0),
        (float(loss_diff(e[0:1], e[1:2])), 0.5),
        (float(loss_orth(e[0:1], e[1:2], e[2:3], e[3:4])), 0.0),
        (float(loss_orth(x, x, x, x)), 1.0),
        (float(loss_orth(e[0:1], -e[0:1], e[2:3], e[3:4])), 0.5),
        (float(loss_dacl(ortho, tau=1.0)), math.log(3.0)),
        (float(weighted_fd({"align": 0.0, "diff": 1.0, "orth": 0.5, "dacl": math.log(3.0)}, config)),
         (1.0 + 0.5) / 3.0 + 0.01 * math.log(3.0)),
        (float(loss_fd(ortho, FDConfig(alpha=0.0, beta=0.0, gamma=0.0, delta=0.0))[0]), 0.0),
    ]
    positive = all(float(loss_dacl(_bundle(gen, 3, 8))) > 0 for _ in range(trials))
    return [
        _oracle_result("pool_tokens", "Token mean pooling vs loop oracle", pooled),
        _oracle_result("loss_align", "Shared alignment vs cosine loop oracle", align),
        _oracle_result("loss_diff", "Specific opposition vs cosine loop oracle", diff),
        _oracle_result("loss_orth", "Orthogonality vs cosine loop oracle", orth),
        _oracle_result("loss_dacl", "Contrastive loss vs (b, m, family) loop oracle", dacl),
        _oracle_result("loss_fd", "Weighted disentanglement total vs oracle", fd),
        _oracle_result("fd_boundaries", "Closed-form boundary cases", boundary),
        CheckResult("dacl_positive", "Contrastive loss strictly positive", f"{trials} random bundle(s)", positive),
    ]


# ── Trainer ────────────────────────────────────────────────────────────────


def check_trainer(gen: torch.Generator, trials: int) -> list[CheckResult]:
    pairs = []
    for _ in range(trials):
        logits = _rand(gen, 2, 2, 8, 8)
        mask = (torch.rand(2, 8, 8, generator=gen) > 0.5).long()
        ce, dice = seg_losses(logits, mask)
        want_ce, want_dice = oracles.seg_losses_oracle(logits, mask)
        pairs.extend([(float(ce), want_ce), (float(dice), want_dice)])

    epochs = 150
    exact = all(lambda2_schedule(e, epochs, 1.0, 1.0) == min(1.0, (e / epochs) * 1.0) for e in range(1, epochs + 1))
    cases = [
        (lambda2_schedule(epochs, epochs, 1.0, 1.0), 1.0),
        (lambda2_schedule(1, epochs, 1.0, 1.0), 1.0 / 150.0),
        (lambda2_schedule(epochs, epochs, 0.5, 2.0), 0.5),
    ]
    return [
        _oracle_result("seg_losses", "Cross-entropy and Dice vs pixel loop oracle", pairs),
        CheckResult("lambda2_schedule", "Progressive weight closed form", f"{epochs} epochs compared bitwise", exact),
        _oracle_result("lambda2_cases", "Progressive weight boundary cases", cases, tol=0.0),
    ]


# ── Metrics ────────────────────────────────────────────────────────────────


def check_metrics(seed: int, masks: int = 100) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    counts_ok, overlap_ok, identity_ok = True, True, True
    for _ in range(masks):
        pred = rng.integers(0, 2, size=(8, 8))
        gt = rng.integers(0, 2, size=(8, 8))
        counts = confusion(pred, gt)
        counts_ok &= (counts.tp, counts.fp, counts.fn, counts.tn) == oracles.confusion_oracle(pred.tolist(), gt.tolist())
        scores = metrics_from_counts(counts)
        if counts.tp + counts.fp + counts.fn > 0:
            overlap_ok &= (scores["iou"], scores["dice"]) == oracles.overlap_oracle(pred.tolist(), gt.tolist())
        identity_ok &= math.isclose(scores["dice"], 2 * scores["iou"] / (1 + scores["iou"]), abs_tol=1e-12)
    return [
        CheckResult("confusion", "Confusion counts vs double-loop oracle", f"{masks} random 8x8 masks, exact", counts_ok),
        CheckResult("overlap", "IoU and Dice vs pixel-set oracle", f"{masks} random 8x8 masks, exact", overlap_ok),
        CheckResult("dice_iou_identity", "Dice = 2 IoU / (1 + IoU)", f"{masks} random 8x8 masks", identity_ok),
    ]


# ── Gradients ──────────────────────────────────────────────────────────────


def check_gradients(gen: torch.Generator) -> list[CheckResult]:
    """Central finite differences (perturbation 1e-4) on B=2, D=8 inputs."""

    def leaf(*shape: int) -> torch.Tensor:
        return _rand(gen, *shape).requires_grad_(True)

    def bundle_fn(fn: Callable[[DisentangledBundle], torch.Tensor]) -> Callable[..., torch.Tensor]:
        return lambda ws, wp, ns, np_: fn(DisentangledBundle.from_vectors(ws, wp, ns, np_))

    mask = (torch.rand(2, 6, 6, generator=gen) > 0.5).long()
    config = FDConfig()
    cases: dict[str, tuple[Callable[..., torch.Tensor], tuple[torch.Tensor, ...]]] = {
        "mmd": (lambda a, b: mmd_loss(a, b, 2.0), (leaf(2, 8), leaf(2, 8))),
        "align": (loss_align, (leaf(2, 8), leaf(2, 8))),
        "diff": (loss_diff, (leaf(2, 8), leaf(2, 8))),
        "orth": (loss_orth, tuple(leaf(2, 8) for _ in range(4))),
        "dacl": (bundle_fn(lambda b: loss_dacl(b, config.tau)), tuple(leaf(2, 8) for _ in range(4))),
        "fd": (bundle_fn(lambda b: loss_fd(b, config)[0]), tuple(leaf(2, 8) for _ in range(4))),
        "ce": (lambda lg: seg_losses(lg, mask)[0], (leaf(2, 2, 6, 6),)),
        "dice": (lambda lg: seg_losses(lg, mask)[1], (leaf(2, 2, 6, 6),)),
    }
    results = []
    for name, (fn, inputs) in cases.items():
        ok = torch.autograd.gradcheck(fn, inputs, eps=GRAD_EPS, atol=1e-6, rtol=GRAD_RTOL, raise_exception=False)
        results.append(
            CheckResult(f"grad_{name}", f"Gradient of {name} vs central differences", "float64, eps 1e-4, rtol 1e-3", ok)
        )
    return results


def run_loss_checks(trials: int = 20, seed: int = 0) -> list[CheckResult]:
    """Run every check; a check that raises is reported as failed."""
    start = time.perf_counter()
    gen = torch.Generator().manual_seed(seed)
    suites: list[tuple[str, Callable[[], list[CheckResult]]]] = [
        ("descriptors", lambda: check_descriptors(gen, trials)),
        ("mmd", lambda: check_mmd(gen, trials)),
        ("disentangle", lambda: check_disentangle(gen, trials)),
        ("trainer", lambda: check_trainer(gen, trials)),
        ("metrics", lambda: check_metrics(seed)),
        ("gradients", lambda: check_gradients(gen)),
    ]
    results: list[CheckResult] = []
    for name, suite in suites:
        try:
            results.extend(suite())
        except Exception as exc:
            logger.exception("Check suite %s crashed", name)
            results.append(CheckResult(name, f"{name} suite", f"raised {type(exc).__name__}: {exc}", False))
    failed = sum(not r.passed for r in results)
    logger.info(
        "[INFO] Loss checks: %d passed, %d failed in %.2fs", len(results) - failed, failed, time.perf_counter() - start
    )
    return results
