"""
Console reports for suites, reductions and oracle answers.
"""

from typing import Iterable, List, Optional

from mpmath import mp

from ..records.models import (
    BoundCheck,
    CheckResult,
    ClaimCheck,
    LemmaReport,
    ReductionArtifacts,
    SuiteStats,
    Verdict,
)

BANNER = "=" * 70
RULE = "-" * 50


class ConsoleReporter:
    """Plain-text output for the command line"""

    def banner(self, title: str, subtitle: Optional[str] = None):
        print("\n" + BANNER)
        print(title)
        if subtitle:
            print(subtitle)
        print(BANNER + "\n")

    def phase(self, number: int, title: str):
        print("\n" + RULE)
        print(f"PHASE {number}: {title}")
        print(RULE)

    def format_check(self, check: CheckResult) -> str:
        mark = "PASS" if check.passed else "FAIL"
        return f"  [{mark}] {check.name}" + (f" ({check.detail})" if check.detail else "")

    def print_checks(self, checks: Iterable[CheckResult]):
        for check in checks:
            print(self.format_check(check))

    def format_bound(self, check: BoundCheck) -> str:
        status = "n/a " if not check.applicable else ("ok  " if check.holds else "FAIL")
        line = f"  [{status}] {check.name}: observed {check.observed:.6g} vs bound {check.bound:.6g}"
        return line + (f"  {check.detail}" if check.detail else "")

    def format_claim(self, claim: ClaimCheck) -> str:
        kind = "exact" if claim.exact else "bounded"
        return f"  [{'ok  ' if claim.holds else 'FAIL'}] {claim.name} ({kind}, margin {claim.margin})"

    def format_artifacts(self, artifacts: ReductionArtifacts) -> str:
        lines = [
            f"{artifacts.kind}{'  [TOY: not a sound reduction]' if artifacts.toy else ''}",
            f"  d = {artifacts.d}",
            f"  log A = {mp.nstr(artifacts.log_A.value, 10)}",
            f"  log G = {mp.nstr(artifacts.log_G.value, 10)}{' (heuristic)' if artifacts.log_G.heuristic else ''}",
            f"  G >= 2^m A: {artifacts.gap_holds}",
        ]
        if artifacts.q is not None:
            lines.append(f"  q = {artifacts.q}")
        if artifacts.min_feasible_m is not None:
            lines.append(f"  smallest feasible m = {artifacts.min_feasible_m}")
        lines += [self.format_claim(c) for c in artifacts.claims]
        return "\n".join(lines)

    def format_lemma(self, report: LemmaReport) -> List[str]:
        lines = []
        for regime in report.regimes:
            upper = "inf" if regime.p_hi is None else f"{float(regime.p_hi):.7g}"
            lines.append(
                f"  [{regime.verdict.value.upper():<4}] {regime.name}: p in [{float(regime.p_lo):.7g}, {upper}], "
                f"tau = {float(regime.tau)}"
            )
            for anchor in regime.anchors:
                lines.append(
                    f"      {anchor.name} = {mp.nstr(anchor.value.value, 14)} "
                    f"{'>' if anchor.holds else 'NOT >'} {float(anchor.bound)} "
                    f"(relative margin {anchor.relative_margin:.2e})"
                )
        lines.append(f"  coverage: {'ok' if report.coverage_ok else 'GAP'}")
        return lines

    def print_lemma(self, report: LemmaReport):
        print("\n".join(self.format_lemma(report)))
        if report.verdict is not Verdict.PASS:
            print(f"  first failure: {report.first_failure}")

    def print_summary(self, stats: SuiteStats, paths: Iterable[str] = ()):
        print("\n" + BANNER)
        print(f"SUITE {stats.suite.upper()} {'PASSED' if stats.all_passed else 'FAILED'}")
        print(BANNER)
        print(f"   Duration: {stats.duration_seconds:.1f}s")
        print(f"   Checks: {stats.checks_passed}/{stats.checks_run}")
        for failure in stats.failures[:10]:
            print(f"   Failed: {failure}")
        for path in paths:
            print(f"   Certificate: {path}")
        print(BANNER)


_console: Optional[ConsoleReporter] = None


def get_console_reporter() -> ConsoleReporter:
    """Get console reporter instance"""
    global _console
    if _console is None:
        _console = ConsoleReporter()
    return _console
