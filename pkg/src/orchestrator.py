"""
Verification suite runner.
Coordinates the acceptance suites: theta lemma, gadgets, sparsification and
the reduction pipeline, and writes one certificate bundle per suite.
"""

import logging
from datetime import datetime
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .config.settings import settings
from .errors import LatforgeError
from .gadgets import count_ratio_trend, find_gadget_shift, svp_gadget_params, verify_shift
from .lattice import build_lattice, dist_p, lattice_from_columns, solve_maxlin_exact
from .records.models import (
    BoundCheck,
    Certificate,
    CheckResult,
    NormSpec,
    RationalMatrix,
    SuiteStats,
    Verdict,
)
from .records.repository import ArtifactStore, get_artifact_store
from .reductions import (
    bdd_counting_report,
    lemma_counting_report,
    maxlin_to_cvp,
    random_maxlin_instance,
    sparsification_rates,
)
from .utils.logging_setup import configure_logging
from .utils.reporting import ConsoleReporter, get_console_reporter
from .verifier import verify_lemma_theta_half

logger = logging.getLogger(__name__)

SUITES = ("theta-lemma", "gadget", "sparsification", "pipeline")

GADGET_EXPONENTS = (Fraction("2.2"), Fraction(3), Fraction(4))
NEAR_TWO_EXPONENT = 2 + Fraction(1, 2 * 10**7)
PIPELINE_EXPONENTS = (Fraction(1), Fraction(2), Fraction(3))
BLOCK_CONFIGS = 10
BDD_ALPHA = Fraction(2)


def _sparsification_lattices() -> Dict[str, tuple]:
    """(lattice, l_p radius^p, target) for the envelope checks"""
    return {
        "scaled-Z2": (
            build_lattice(RationalMatrix.identity(2, 2)),
            Fraction(20),
            (Fraction(1), Fraction(0)),
        ),
        "checkerboard": (
            lattice_from_columns([[1, 1], [1, -1]]),
            Fraction(10),
            (Fraction(1), Fraction(0)),
        ),
    }


def _bound_results(prefix: str, checks: Sequence[BoundCheck]) -> List[CheckResult]:
    console = get_console_reporter()
    return [
        CheckResult(name=f"{prefix}-{c.name}", passed=c.holds, detail=console.format_bound(c).strip())
        for c in checks
    ]


class SuiteRunner:
    """
    Runs acceptance suites and records every check.
    Library errors inside a phase become failed checks, so one bad phase
    does not hide the rest of the report.
    """

    def __init__(self, store: Optional[ArtifactStore] = None, console: Optional[ConsoleReporter] = None):
        self.store = store or get_artifact_store()
        self.console = console or get_console_reporter()
        self.bundle: Dict[str, list] = {}

    def _record(self, stats: SuiteStats, results: Sequence[CheckResult]) -> None:
        for result in results:
            stats.record(result)
            self.bundle.setdefault(stats.suite, []).append(result.model_dump(mode="json"))
        self.console.print_checks(results)

    def _guarded(self, stats: SuiteStats, name: str, phase: Callable[[], List[CheckResult]]) -> None:
        try:
            results = phase()
        except LatforgeError as e:
            logger.error(f"{name}: {e}")
            results = [CheckResult(name=name, passed=False, detail=str(e))]
        self._record(stats, results)

    # ------------------------------------------------------------------ #
    # Suites
    # ------------------------------------------------------------------ #

    def theta_lemma_checks(self) -> List[CheckResult]:
        report = verify_lemma_theta_half()
        self.console.print_lemma(report)
        path = self.store.write_certificate(
            Certificate(name="theta-lemma", verdict=report.verdict, body=report.model_dump(mode="json"))
        )
        self.bundle.setdefault("paths", []).append(str(path))
        results = [
            CheckResult(name=f"regime-{r.name}", passed=r.verdict is Verdict.PASS, detail=r.detail)
            for r in report.regimes
        ]
        results.append(CheckResult(name="coverage", passed=report.coverage_ok))

        control = verify_lemma_theta_half(large_p_tau=1)
        results.append(
            CheckResult(
                name="negative-control",
                passed=control.verdict is not Verdict.PASS,
                detail=f"tau = 1 in the large-p regime gives {control.verdict.value}",
            )
        )
        return results

    def gadget_checks(self, max_dim: Optional[int] = None) -> List[CheckResult]:
        max_dim = max_dim or settings.budget.max_gadget_dim
        sigma = 1 + Fraction(8, 3) * Fraction(settings.reduction.epsilon)
        results: List[CheckResult] = []
        for p in GADGET_EXPONENTS + (NEAR_TWO_EXPONENT,):
            t, witness = find_gadget_shift(p)
            verify_shift(p, t, witness)
            results.append(CheckResult(name=f"shift-p{float(p):.8g}", passed=True, detail=f"t = {t}, z = {witness.z}"))

        for p in GADGET_EXPONENTS:
            params = svp_gadget_params(p, sigma)
            frame, slope = count_ratio_trend(params, range(1, max_dim + 1))
            self.store.write_table(f"gadget_counts_p{float(p):g}.csv", frame)
            for _, row in frame.iterrows():
                results.append(
                    CheckResult(name=f"counts-p{float(p):g}-d{int(row['d'])}", passed=bool(row["all_bounds_hold"]))
                )
            logger.info(f"Gadget p={p}: log(close/short) slope in d = {slope:.4f}")
        return results

    def sparsification_checks(
        self, trials: Optional[int] = None, primes: Optional[Sequence[int]] = None, seed: int = 0
    ) -> List[CheckResult]:
        primes = primes or settings.verifier.sparsification_primes
        norm = NormSpec(p=2)
        results: List[CheckResult] = []
        for name, (lattice, radius, target) in _sparsification_lattices().items():
            for q in primes:
                checks = sparsification_rates(lattice, norm, q, radius, trials=trials, seed=seed, target=target)
                results += _bound_results(f"{name}-q{q}", checks)
        return results

    def pipeline_checks(
        self, n_max: int = 4, m_max: int = 6, instances: Optional[int] = None, seed: int = 0
    ) -> List[CheckResult]:
        instances = instances or settings.verifier.pipeline_instances
        rng = np.random.default_rng(seed)
        results: List[CheckResult] = []

        agree = {p: [0, 0] for p in PIPELINE_EXPONENTS}
        for k in range(instances):
            p = PIPELINE_EXPONENTS[k % len(PIPELINE_EXPONENTS)]
            inst = random_maxlin_instance(rng, int(rng.integers(1, n_max + 1)), int(rng.integers(1, m_max + 1)))
            cvp = maxlin_to_cvp(inst, NormSpec(p=p))
            dist = dist_p(cvp.lattice, cvp.norm, cvp.target).distance_pth_power
            agree[p][0] += dist == inst.m - solve_maxlin_exact(inst).satisfied
            agree[p][1] += 1
        for p, (ok, total) in agree.items():
            results.append(CheckResult(name=f"maxlin-distance-p{p}", passed=ok == total, detail=f"{ok}/{total}"))

        for k in range(BLOCK_CONFIGS):
            inst = random_maxlin_instance(rng, int(rng.integers(1, 3)), int(rng.integers(1, 3)))
            cvp = maxlin_to_cvp(inst, NormSpec(p=3))
            d = 1 + k % 3
            close = 1 + cvp.radius_pth_power + Fraction(d, 8)
            checks = lemma_counting_report(
                cvp, RationalMatrix.identity(d), [Fraction(1, 2)] * d, close, 2 * close
            )
            results += _bound_results(f"svp-block{k}", checks)

        for k in range(BLOCK_CONFIGS):
            inst = random_maxlin_instance(rng, int(rng.integers(1, 3)), 1 + k % 2)
            cvp = maxlin_to_cvp(inst, NormSpec(p=2))
            checks = bdd_counting_report(cvp, BDD_ALPHA, d=1 + k % 3)
            results += _bound_results(f"bdd-block{k}", checks)
        return results

    # ------------------------------------------------------------------ #
    # Entry
    # ------------------------------------------------------------------ #

    def run(self, suite: str, **options) -> SuiteStats:
        """Run one suite (or "all") and return its statistics."""
        names = SUITES if suite == "all" else (suite,)
        stats = SuiteStats(suite=suite)
        self.bundle = {}

        self.console.banner(f"LATFORGE VERIFY: {suite}", datetime.now().strftime("%Y-%m-%d %H:%M:%S"))
        phases = {
            "theta-lemma": lambda: self.theta_lemma_checks(),
            "gadget": lambda: self.gadget_checks(options.get("max_dim")),
            "sparsification": lambda: self.sparsification_checks(
                options.get("trials"), options.get("primes"), options.get("seed") or 0
            ),
            "pipeline": lambda: self.pipeline_checks(
                options.get("n_max") or 4,
                options.get("m_max") or 6,
                options.get("instances"),
                options.get("seed") or 0,
            ),
        }
        with self.store.run(["verify", suite], seed=options.get("seed")):
            for number, name in enumerate(names, start=1):
                self.console.phase(number, name)
                self._guarded(stats, name, phases[name])

            stats.completed_at = datetime.now()
            verdict = Verdict.PASS if stats.all_passed else Verdict.FAIL
            body = {k: v for k, v in self.bundle.items() if k != "paths"}
            path = self.store.write_certificate(Certificate(name=f"suite-{suite}", verdict=verdict, body=body))
        stats.artifact_paths = self.bundle.get("paths", []) + [str(path)]
        self.store.save_suite_stats(stats)
        self.console.print_summary(stats, stats.artifact_paths)
        return stats


def run(suite: str = "all", **options) -> SuiteStats:
    """Synchronous entry point"""
    configure_logging()
    return SuiteRunner().run(suite, **options)
