"""Per-step and per-epoch loss records."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

LOSS_FIELDS = ("da", "align", "diff", "orth", "dacl", "fd", "ce", "dice", "total")
WEIGHT_FIELDS = ("lambda1", "lambda2", "lambda3", "lambda4")


@dataclass
class LossReport:
    epoch: int
    step: int
    da: float
    align: float
    diff: float
    orth: float
    dacl: float
    fd: float
    ce: float
    dice: float
    total: float
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float

    def composed_total(self) -> float:
        return self.lambda1 * self.da + self.lambda2 * self.fd + self.lambda3 * self.ce + self.lambda4 * self.dice

    def is_consistent(self, tol: float = 1e-6) -> bool:
        return math.isclose(self.total, self.composed_total(), rel_tol=tol, abs_tol=tol)

    def to_row(self) -> dict:
        return asdict(self)

    @classmethod
    def mean(cls, reports: list["LossReport"]) -> "LossReport":
        """Average the loss fields; weights are constant within an epoch."""
        if not reports:
            raise ValueError("Cannot average an empty list of reports")
        first = reports[0]
        averaged = {name: sum(getattr(r, name) for r in reports) / len(reports) for name in LOSS_FIELDS}
        return cls(
            epoch=first.epoch,
            step=reports[-1].step,
            **averaged,
            **{name: getattr(first, name) for name in WEIGHT_FIELDS},
        )

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


class TrainingLog:
    """CSV training log: a ``kind`` column tells ``step`` rows from ``epoch`` rows."""

    def __init__(self, path: str | Path, config_hash: str, keep_before_epoch: Optional[int] = None) -> None:
        """Open the log for writing.

        ``keep_before_epoch`` keeps existing rows of earlier epochs (resume);
        otherwise any existing file is replaced.
        """
        self.path = Path(path)
        self.config_hash = config_hash
        self.path.parent.mkdir(parents=True, exist_ok=True)
        kept: list[dict[str, str]] = []
        if keep_before_epoch is not None and self.path.exists():
            kept = [row for row in read_log(self.path) if int(row["epoch"]) < keep_before_epoch]
        with self.path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=LOG_COLUMNS)
            writer.writeheader()
            writer.writerows(kept)

    def _append(self, kind: str, report: LossReport) -> None:
        with self.path.open("a", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=LOG_COLUMNS)
            row = {name: repr(value) if isinstance(value, float) else value for name, value in report.to_row().items()}
            writer.writerow({"kind": kind, **row, "config_hash": self.config_hash})

    def write_step(self, report: LossReport) -> None:
        self._append("step", report)

    def write_epoch(self, report: LossReport) -> None:
        self._append("epoch", report)


LOG_COLUMNS = ["kind", *LossReport.columns(), "config_hash"]


def read_log(path: str | Path, kind: Optional[str] = None) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    return [row for row in rows if kind is None or row["kind"] == kind]


def epoch_reports(path: str | Path) -> list[LossReport]:
    """Epoch rows of a training log as LossReports."""
    reports = []
    for row in read_log(path, kind="epoch"):
        values = {name: float(row[name]) for name in (*LOSS_FIELDS, *WEIGHT_FIELDS)}
        reports.append(LossReport(epoch=int(row["epoch"]), step=int(row["step"]), **values))
    return reports
