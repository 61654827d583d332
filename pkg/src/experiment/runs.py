"""Run records for training sessions.

Each run is stored as a folder under OUTPUT_DIR/<run_name>/ with:
  - run.json        metadata and state
  - train_log.csv   one row per step and per epoch
  - checkpoints/    periodic checkpoints plus last.pt
  - plots/          loss curves
"""

from __future__ import annotations

import json
import logging
import os
import re
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "ADF_OUTPUT_DIR"
APP_DIR = "adfseg"


def get_default_output_dir() -> Path:
    """Return the default run directory for this user.

    Override with `ADF_OUTPUT_DIR` if needed.
    """
    override = os.environ.get(OUTPUT_DIR_ENV)
    if override:
        return Path(override).expanduser().resolve()

    # Linux:   $XDG_DATA_HOME/adfseg/runs or ~/.local/share/adfseg/runs
    # macOS:   ~/Library/Application Support/adfseg/runs
    # Windows: %APPDATA%\adfseg\runs
    if sys.platform == "win32":
        base = os.environ.get("APPDATA")
        if base:
            return (Path(base) / APP_DIR / "runs").resolve()
        return (Path.home() / "AppData" / "Roaming" / APP_DIR / "runs").resolve()

    if sys.platform == "darwin":
        return (Path.home() / "Library" / "Application Support" / APP_DIR / "runs").resolve()

    xdg = os.environ.get("XDG_DATA_HOME")
    if xdg:
        return (Path(xdg) / APP_DIR / "runs").resolve()
    return (Path.home() / ".local" / "share" / APP_DIR / "runs").resolve()


class RunStatus(str, Enum):
    PENDING = "pending"
    TRAINING = "training"
    DONE = "done"
    ERROR = "error"

    @property
    def label(self) -> str:
        labels = {
            "pending": "Pending",
            "training": "Training",
            "done": "Done",
            "error": "Error",
        }
        return labels.get(self.value, self.value)

    def can_resume(self) -> bool:
        return self != RunStatus.DONE


@dataclass
class Run:
    """A single training run."""

    name: str
    status: RunStatus = RunStatus.PENDING
    created_at: str = field(default_factory=lambda: datetime.now().isoformat())
    updated_at: str = field(default_factory=lambda: datetime.now().isoformat())

    config_hash: str = ""
    model_kind: str = ""
    epochs_total: int = 0
    epochs_completed: int = 0
    last_checkpoint: str = ""

    error_message: str = ""

    # Not serialised; set by RunManager / Run.open
    _output_dir: Path = field(default=Path("."), init=False, repr=False, compare=False)

    # ── Derived ────────────────────────────────────────────────────────────

    @property
    def folder(self) -> Path:
        return self._output_dir / self.name

    @property
    def meta_path(self) -> Path:
        return self.folder / "run.json"

    @property
    def log_path(self) -> Path:
        return self.folder / "train_log.csv"

    @property
    def checkpoints_dir(self) -> Path:
        return self.folder / "checkpoints"

    @property
    def plots_dir(self) -> Path:
        return self.folder / "plots"

    @property
    def progress_pct(self) -> float:
        if self.epochs_total == 0:
            return 0.0
        return self.epochs_completed / self.epochs_total

    @property
    def updated_at_dt(self) -> datetime:
        try:
            return datetime.fromisoformat(self.updated_at)
        except ValueError:
            return datetime.min

    def checkpoint_path(self, epoch: int) -> Path:
        return self.checkpoints_dir / f"epoch_{epoch:04d}.pt"

    def touch(self) -> None:
        self.updated_at = datetime.now().isoformat()

    def save(self) -> None:
        """Persist run metadata to run.json."""
        self.folder.mkdir(parents=True, exist_ok=True)
        self.touch()
        data = asdict(self)
        data["status"] = self.status.value
        data.pop("_output_dir", None)
        self.meta_path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        logger.debug("Saved run metadata: %s", self.meta_path)

    @classmethod
    def load(cls, folder: Path) -> "Run":
        """Load a run from its folder."""
        meta_path = folder / "run.json"
        if not meta_path.exists():
            raise FileNotFoundError(f"No run.json found in {folder}")
        data = json.loads(meta_path.read_text(encoding="utf-8"))
        data["status"] = RunStatus(data["status"])
        run = cls(**data)
        run._output_dir = folder.parent
        return run

    @classmethod
    def open(cls, folder: str | Path) -> "Run":
        """Load the run stored in ``folder`` or start a new one there."""
        folder = Path(folder)
        if (folder / "run.json").exists():
            return cls.load(folder)
        run = cls(name=folder.name)
        run._output_dir = folder.parent
        run.save()
        return run


class RunManager:
    """Manages all runs stored in the output directory."""

    def __init__(self, output_dir: Optional[Path] = None) -> None:
        self.output_dir = Path(output_dir) if output_dir is not None else get_default_output_dir()
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except Exception as exc:
            logger.warning("Could not create output directory %s: %s", self.output_dir, exc)

    def list_runs(self) -> list[Run]:
        """Return all runs sorted by most recently updated."""
        runs: list[Run] = []
        if not self.output_dir.exists():
            return runs
        for folder in self.output_dir.iterdir():
            if folder.is_dir() and (folder / "run.json").exists():
                try:
                    runs.append(Run.load(folder))
                except Exception as exc:
                    logger.warning("Could not load run from %s: %s", folder, exc)
        runs.sort(key=lambda r: r.updated_at_dt, reverse=True)
        return runs

    def folder_for(self, name: str) -> Path:
        return self.output_dir / self._sanitise_name(name)

    @staticmethod
    def _sanitise_name(name: str) -> str:
        """Convert a display name to a safe directory name."""
        safe = re.sub(r'[<>:"/\\|?*\x00-\x1f]', "_", name.strip())
        safe = re.sub(r"\s+", "_", safe)
        safe = safe.strip("._")
        return safe or "run"
