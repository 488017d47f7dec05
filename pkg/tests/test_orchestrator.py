"""Tests for the suite runner."""

from pathlib import Path

import pytest

from src.errors import InfeasibleError
from src.orchestrator import BLOCK_CONFIGS, PIPELINE_EXPONENTS, SuiteRunner, _bound_results
from src.records.models import BoundCheck


class TestSuiteRunner:
    def test_sparsification_suite(self, store):
        runner = SuiteRunner(store=store)
        stats = runner.run("sparsification", trials=500, primes=[3], seed=0)
        assert stats.all_passed
        assert stats.checks_run == 8
        assert all(Path(p).exists() for p in stats.artifact_paths)
        assert list(store.read_table("suite_history.csv")["suite"]) == ["sparsification"]
        assert all(" vs bound " in c["detail"] for c in runner.bundle["sparsification"])

    def test_bound_details_show_observed_and_bound(self):
        checks = [
            BoundCheck(name="upper", observed=3.0, bound=4.5, holds=True),
            BoundCheck(name="lower", observed=0.0, bound=1.0, holds=True, applicable=False),
        ]
        results = _bound_results("block", checks)
        assert [r.name for r in results] == ["block-upper", "block-lower"]
        assert results[0].detail == "[ok  ] upper: observed 3 vs bound 4.5"
        assert results[1].detail.startswith("[n/a ] lower")

    def test_phase_errors_become_failed_checks(self, store):
        runner = SuiteRunner(store=store)

        def broken(*_args):
            raise InfeasibleError("no shift")

        runner.gadget_checks = broken
        stats = runner.run("gadget")
        assert not stats.all_passed
        assert stats.failures == ["gadget: parameter-infeasible: no shift"]

    @pytest.mark.slow
    def test_pipeline_suite(self, store):
        runner = SuiteRunner(store=store)
        stats = runner.run("pipeline", instances=9, n_max=2, m_max=3, seed=1)
        assert stats.all_passed, stats.failures
        names = [c["name"] for c in runner.bundle["pipeline"]]
        assert len([n for n in names if n.startswith("svp-block")]) == 2 * BLOCK_CONFIGS
        assert len([n for n in names if n.startswith("bdd-block")]) == 3 * BLOCK_CONFIGS
        assert stats.checks_run == len(PIPELINE_EXPONENTS) + 5 * BLOCK_CONFIGS
