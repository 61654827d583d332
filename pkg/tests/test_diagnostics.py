import pytest
import torch

import src.diagnostics.losscheck as losscheck
from src.diagnostics import CheckResult, run_loss_checks
from src.diagnostics.losscheck import check_gradients, check_metrics, check_trainer


@pytest.fixture(scope="module")
def results() -> list[CheckResult]:
    return run_loss_checks(trials=5, seed=1)


class TestLossChecks:
    def test_all_pass(self, results):
        failed = [f"{r.id}: {r.details}" for r in results if not r.passed]
        assert failed == []

    def test_ids_unique(self, results):
        ids = [r.id for r in results]
        assert len(ids) == len(set(ids))

    def test_covers_every_loss_gradient(self, results):
        ids = {r.id for r in results}
        for name in ("mmd", "align", "diff", "orth", "dacl", "fd", "ce", "dice"):
            assert f"grad_{name}" in ids

    def test_suites_individually(self):
        gen = torch.Generator().manual_seed(0)
        for suite in (check_trainer(gen, 3), check_metrics(0, masks=10), check_gradients(gen)):
            assert suite and all(r.passed for r in suite)

    def test_crashing_suite_is_reported(self, monkeypatch):
        def boom(*args, **kwargs):
            raise RuntimeError("boom")

        monkeypatch.setattr(losscheck, "check_mmd", boom)
        results = losscheck.run_loss_checks(trials=2)
        crashed = [r for r in results if r.id == "mmd"]
        assert len(crashed) == 1 and not crashed[0].passed
        assert "boom" in crashed[0].details
