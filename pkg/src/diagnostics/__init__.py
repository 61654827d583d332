"""Loss self-checks against explicit-loop oracles."""

from src.diagnostics.losscheck import CheckResult, run_loss_checks

__all__ = ["CheckResult", "run_loss_checks"]
