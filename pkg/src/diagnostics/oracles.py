"""Explicit-loop reference implementations.

Plain Python float arithmetic over nested lists, written to mirror the
defining sums term by term. Slow; used by the self-check suite and tests.
"""

from __future__ import annotations

import math
from typing import Sequence

import torch

EPS = 1e-8

Vector = Sequence[float]


def _rows(x: torch.Tensor) -> list[list[float]]:
    return x.detach().double().cpu().tolist()


def dot(a: Vector, b: Vector) -> float:
    total = 0.0
    for x, y in zip(a, b):
        total += x * y
    return total


def norm(a: Vector) -> float:
    return math.sqrt(dot(a, a))


def cos(a: Vector, b: Vector, eps: float = EPS) -> float:
    return dot(a, b) / ((norm(a) + eps) * (norm(b) + eps))


# ── Alignment ──────────────────────────────────────────────────────────────


def global_average_oracle(tokens: torch.Tensor) -> list[list[float]]:
    """(B, N, F) → (B, F) by explicit summation over tokens."""
    out = []
    for sample in tokens.detach().double().cpu().tolist():
        n = len(sample)
        out.append([sum(tok[f] for tok in sample) / n for f in range(len(sample[0]))])
    return out


def attention_pool_oracle(tokens: torch.Tensor, scores: torch.Tensor) -> tuple[list[list[float]], list[list[float]]]:
    """Softmax over per-token scores (B, N) then the weighted token sum."""
    weighted, attention = [], []
    for sample, s in zip(tokens.detach().double().cpu().tolist(), _rows(scores)):
        top = max(s)
        exps = [math.exp(v - top) for v in s]
        z = sum(exps)
        a = [e / z for e in exps]
        attention.append(a)
        weighted.append([sum(a[i] * sample[i][f] for i in range(len(sample))) for f in range(len(sample[0]))])
    return weighted, attention


def mmd_oracle(g_w: torch.Tensor, g_n: torch.Tensor, sigma: float) -> float:
    w, n = _rows(g_w), _rows(g_n)

    def k(a: Vector, b: Vector) -> float:
        sq = 0.0
        for x, y in zip(a, b):
            sq += (x - y) ** 2
        return math.exp(-sq / (2.0 * sigma**2))

    b_w, b_n = len(w), len(n)
    k_ww = sum(k(w[i], w[j]) for i in range(b_w) for j in range(b_w)) / (b_w * b_w)
    k_nn = sum(k(n[i], n[j]) for i in range(b_n) for j in range(b_n)) / (b_n * b_n)
    k_wn = sum(k(w[i], n[j]) for i in range(b_w) for j in range(b_n)) / (b_w * b_n)
    return k_ww + k_nn - 2.0 * k_wn


# ── Disentanglement ────────────────────────────────────────────────────────


def align_oracle(z_ws: torch.Tensor, z_ns: torch.Tensor) -> float:
    ws, ns = _rows(z_ws), _rows(z_ns)
    return 0.5 * (1.0 - sum(cos(a, b) for a, b in zip(ws, ns)) / len(ws))


def diff_oracle(z_wp: torch.Tensor, z_np: torch.Tensor) -> float:
    wp, np_ = _rows(z_wp), _rows(z_np)
    return 0.5 * (1.0 + sum(cos(a, b) for a, b in zip(wp, np_)) / len(wp))


def orth_oracle(z_ws: torch.Tensor, z_wp: torch.Tensor, z_ns: torch.Tensor, z_np: torch.Tensor) -> float:
    ws, wp, ns, np_ = _rows(z_ws), _rows(z_wp), _rows(z_ns), _rows(z_np)
    total = 0.0
    for b in range(len(ws)):
        total += cos(ws[b], wp[b]) ** 2 + cos(ns[b], np_[b]) ** 2
    return total / (2 * len(ws))


def dacl_oracle(
    z_ws: torch.Tensor, z_wp: torch.Tensor, z_ns: torch.Tensor, z_np: torch.Tensor, tau: float
) -> float:
    """−log(S_pos / S_den) averaged over anchors; S_den runs over every m
    and the three families z_ns, z_wp, z_np."""
    ws, wp, ns, np_ = _rows(z_ws), _rows(z_wp), _rows(z_ns), _rows(z_np)
    total = 0.0
    for b in range(len(ws)):
        s_pos = math.exp(cos(ws[b], ns[b]) / tau)
        s_den = 0.0
        for m in range(len(ws)):
            for family in (ns, wp, np_):
                s_den += math.exp(cos(ws[b], family[m]) / tau)
        total += -math.log(s_pos / s_den)
    return total / len(ws)


def fd_oracle(
    z_ws: torch.Tensor,
    z_wp: torch.Tensor,
    z_ns: torch.Tensor,
    z_np: torch.Tensor,
    alpha: float,
    beta: float,
    gamma: float,
    delta: float,
    tau: float,
) -> float:
    return (
        alpha * align_oracle(z_ws, z_ns)
        + beta * diff_oracle(z_wp, z_np)
        + gamma * orth_oracle(z_ws, z_wp, z_ns, z_np)
        + delta * dacl_oracle(z_ws, z_wp, z_ns, z_np, tau)
    )


# ── Segmentation ───────────────────────────────────────────────────────────


def seg_losses_oracle(logits: torch.Tensor, mask: torch.Tensor, smooth: float = 1.0) -> tuple[float, float]:
    """Per-pixel two-class cross-entropy and batch soft Dice by pixel loops."""
    lg = logits.detach().double().cpu().tolist()
    mk = mask.detach().cpu().tolist()
    ce_total, count = 0.0, 0
    inter, p_sum, g_sum = 0.0, 0.0, 0.0
    for b in range(len(lg)):
        for i in range(len(lg[b][0])):
            for j in range(len(lg[b][0][i])):
                l0, l1 = lg[b][0][i][j], lg[b][1][i][j]
                top = max(l0, l1)
                log_z = top + math.log(math.exp(l0 - top) + math.exp(l1 - top))
                g = mk[b][i][j]
                ce_total += log_z - (l1 if g == 1 else l0)
                count += 1
                p = math.exp(l1 - log_z)
                inter += p * g
                p_sum += p
                g_sum += g
    dice = 1.0 - (2.0 * inter + smooth) / (p_sum + g_sum + smooth)
    return ce_total / count, dice


def confusion_oracle(pred: Sequence[Sequence[int]], gt: Sequence[Sequence[int]]) -> tuple[int, int, int, int]:
    tp = fp = fn = tn = 0
    for i in range(len(gt)):
        for j in range(len(gt[i])):
            p, g = bool(pred[i][j]), bool(gt[i][j])
            if p and g:
                tp += 1
            elif p:
                fp += 1
            elif g:
                fn += 1
            else:
                tn += 1
    return tp, fp, fn, tn


def overlap_oracle(pred: Sequence[Sequence[int]], gt: Sequence[Sequence[int]]) -> tuple[float, float]:
    """IoU and Dice from intersection and union pixel loops (nonempty union)."""
    inter = union = p_area = g_area = 0
    for i in range(len(gt)):
        for j in range(len(gt[i])):
            p, g = bool(pred[i][j]), bool(gt[i][j])
            inter += p and g
            union += p or g
            p_area += p
            g_area += g
    return inter / union, 2 * inter / (p_area + g_area)
