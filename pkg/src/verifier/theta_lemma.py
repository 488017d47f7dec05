"""
Certified check that Theta_p(tau, 0) < Theta_p(tau, 1/2) for every p >= 2 + 10^-7.

With A_z(p, tau) = exp(-tau (z - 1/2)^p) - exp(-tau z^p) > 0 the inequality is
S_inf(p, tau) > 1/2, so a partial sum S_n above 1/2 suffices. Three regimes:

    p >= 2.2             A_1 alone, increasing in p, above 1/2 at p = 2.2 (tau = 1.949)
    [2.001, 2.2]         two Taylor certificates for S_10 at tau = 0.89, h'' >= -0.64
    [2 + 10^-7, 2.001]   one Taylor certificate for S_11 at tau = 0.162665, h'' >= -16.5

A certificate at p0 bounds h(p0 + D) below by q(D) = h(p0) + h'(p0) D - (L/2) D^2,
an inverted parabola whose minimum over [0, D_max] sits at an endpoint.
"""

import logging
from fractions import Fraction
from typing import Any, Callable, List, Optional, Tuple

from mpmath import mp, mpf

from ..config.settings import settings
from ..errors import IndeterminateError, InputError
from ..numerics.bounded import (
    BoundedValue,
    Comparison,
    as_bounded,
    bounded_sum,
    to_fraction,
    to_mpf,
    working_precision,
)
from ..records.models import (
    AnchorCheck,
    LemmaReport,
    RegimeReport,
    TaylorCertificate,
    TruncatedSumSpec,
    Verdict,
)

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)

LARGE_P_START = Fraction("2.2")
LARGE_P_TAU = Fraction("1.949")
LARGE_P_GRID_END = Fraction(16)

MID_TAU = Fraction("0.89")
MID_TERMS = 10
MID_L = Fraction("0.64")
MID_STEPS = ((Fraction("2.001"), Fraction("0.099")), (Fraction("2.1"), Fraction("0.1")))

NEAR_START = 2 + Fraction(1, 10**7)
NEAR_TAU = Fraction("0.162665")
NEAR_TERMS = 11
NEAR_L = Fraction("16.5")
NEAR_DELTA = Fraction("0.001")

# the h'' enclosure is built for this window of p
DERIVATIVE_P_WINDOW = (Fraction(2), Fraction(5, 2))
HESSIAN_PIECES = 64

# reference lower bounds the run must reproduce
ANCHOR_BOUNDS = {
    "A1(2.2)": HALF,
    "S10(2.001)": Fraction("0.50000971"),
    "h'(2.001)": Fraction("0.067056759"),
    "S10(2.1)": Fraction("0.50623643"),
    "h'(2.1)": Fraction("0.05875258"),
    "q(2.001+0.099)": Fraction("0.5035"),
    "q(2.1+0.1)": Fraction("0.5089"),
    "S11(2+1e-7)": Fraction("0.50000000051525"),
    "h'(2+1e-7)": Fraction("0.009104222964"),
    "q(2+1e-7+0.001)": Fraction("0.5000008"),
}


# ============================================================================
# Terms and partial sums
# ============================================================================

def _weight(x: Fraction, p: Any, tau: Any) -> BoundedValue:
    """exp(-tau x^p)"""
    return (-(as_bounded(tau) * as_bounded(x) ** to_fraction(p))).exp()


def _weight_dp(x: Fraction, p: Any, tau: Any) -> BoundedValue:
    """d/dp exp(-tau x^p) = -tau x^p ln(x) exp(-tau x^p)"""
    if x == 1:
        return BoundedValue.exact(0)
    t = as_bounded(tau)
    y = as_bounded(x) ** to_fraction(p)
    return -(t * y * as_bounded(x).log() * (-(t * y)).exp())


def a_term(z: int, p: Any, tau: Any) -> BoundedValue:
    """A_z(p, tau) = exp(-tau (z - 1/2)^p) - exp(-tau z^p)"""
    if z < 1:
        raise InputError(f"A_z is defined for z >= 1, got {z}")
    return _weight(z - HALF, p, tau) - _weight(Fraction(z), p, tau)


def _check_in_interval(spec: TruncatedSumSpec, p: Fraction) -> None:
    if not spec.p_lo <= p <= spec.p_hi:
        raise InputError(f"p = {p} outside [{spec.p_lo}, {spec.p_hi}]")


def partial_sum(spec: TruncatedSumSpec, p: Any) -> BoundedValue:
    """S_n(p, tau) with accumulated rounding error."""
    p = to_fraction(p)
    _check_in_interval(spec, p)
    return bounded_sum(a_term(z, p, spec.tau) for z in range(1, spec.n_terms + 1))


def _h_prime(spec: TruncatedSumSpec, p: Fraction) -> BoundedValue:
    return bounded_sum(
        _weight_dp(z - HALF, p, spec.tau) - _weight_dp(Fraction(z), p, spec.tau)
        for z in range(1, spec.n_terms + 1)
    )


def _unimodal_range(fn: Callable[[mpf], BoundedValue], y_lo: mpf, y_hi: mpf, peak: mpf) -> Tuple[mpf, mpf]:
    """Range of fn on [y_lo, y_hi] for fn rising up to `peak` and falling after."""
    ends = (fn(y_lo), fn(y_hi))
    lo = min(e.lower for e in ends)
    hi = max(e.upper for e in ends)
    if y_lo <= peak <= y_hi:
        hi = max(hi, fn(peak).upper)
    return lo, hi


def _second_derivative_range(x: Fraction, p_lo: Fraction, p_hi: Fraction, tau: Fraction) -> Tuple[mpf, mpf]:
    """
    Enclosure over p in [p_lo, p_hi] of
        d^2/dp^2 exp(-tau x^p) = tau ln(x)^2 (tau y^2 - y) exp(-tau y),   y = x^p.
    Both y exp(-tau y) and tau y^2 exp(-tau y) are unimodal in y.
    """
    if x == 1:
        return mpf(0), mpf(0)
    t = as_bounded(tau)
    ends = (as_bounded(x) ** p_lo, as_bounded(x) ** p_hi)
    y_lo = min(e.lower for e in ends)
    y_hi = max(e.upper for e in ends)
    rising = _unimodal_range(lambda y: t * y * y * (-(t * y)).exp(), y_lo, y_hi, 2 / t.value)
    falling = _unimodal_range(lambda y: y * (-(t * y)).exp(), y_lo, y_hi, 1 / t.value)
    g_lo, g_hi = rising[0] - falling[1], rising[1] - falling[0]
    scale = t * as_bounded(x).log() ** 2
    products = [s * g for s in (scale.lower, scale.upper) for g in (g_lo, g_hi)]
    return min(products), max(products)


def _second_derivative_lower_bound(spec: TruncatedSumSpec, p_lo: Fraction, p_hi: Fraction) -> mpf:
    """min over [p_lo, p_hi] of h'', bounded termwise on HESSIAN_PIECES sub-intervals."""
    worst: Optional[mpf] = None
    width = (p_hi - p_lo) / HESSIAN_PIECES
    for k in range(HESSIAN_PIECES):
        a, b = p_lo + k * width, p_lo + (k + 1) * width
        piece = mpf(0)
        for z in range(1, spec.n_terms + 1):
            piece += _second_derivative_range(z - HALF, a, b, spec.tau)[0]
            piece -= _second_derivative_range(Fraction(z), a, b, spec.tau)[1]
        worst = piece if worst is None else min(worst, piece)
    return worst


def partial_sum_derivatives(spec: TruncatedSumSpec, p: Any) -> Tuple[BoundedValue, mpf]:
    """h'(p) and a lower bound on h'' valid on the whole of spec's p interval."""
    p = to_fraction(p)
    _check_in_interval(spec, p)
    lo, hi = DERIVATIVE_P_WINDOW
    if not (lo < spec.p_lo and spec.p_hi < hi):
        raise InputError(
            f"second-derivative bound needs {lo} < p_lo <= p_hi < {hi}, got [{spec.p_lo}, {spec.p_hi}]",
            kind="interval-too-wide",
        )
    return _h_prime(spec, p), _second_derivative_lower_bound(spec, spec.p_lo, spec.p_hi)


# ============================================================================
# Taylor certificates
# ============================================================================

def _above_half(value: BoundedValue, what: str) -> bool:
    c = value.compare(HALF)
    if c is Comparison.INDETERMINATE:
        raise IndeterminateError(f"{what} = {mp.nstr(value.value, 15)} is not separated from 1/2 at {mp.dps} digits")
    return c is Comparison.GREATER


def certify_interval(spec: TruncatedSumSpec, p0: Any, delta_max: Any, L: Any) -> TaylorCertificate:
    """Certificate that S_n > 1/2 on [p0, p0 + delta_max] given h'' >= -L there."""
    p0, delta_max, L = to_fraction(p0), to_fraction(delta_max), to_fraction(L)
    if delta_max < 0 or L < 0:
        raise InputError("delta_max and L must be non-negative")
    _check_in_interval(spec, p0)
    _check_in_interval(spec, p0 + delta_max)

    window = TruncatedSumSpec(n_terms=spec.n_terms, tau=spec.tau, p_lo=p0, p_hi=p0 + delta_max)
    h0 = partial_sum(window, p0)
    h_prime, curvature = partial_sum_derivatives(window, p0)
    q_end = h0 + h_prime * delta_max - as_bounded(L * delta_max ** 2 / 2)

    notes = []
    verdict = Verdict.PASS
    if curvature < -L:
        verdict = Verdict.FAIL
        notes.append(f"h'' bound {mp.nstr(curvature, 8)} is below -L = {-float(L)}")
    for label, value in (("h(p0)", h0), ("q(delta_max)", q_end)):
        if not _above_half(value, label):
            verdict = Verdict.FAIL
            notes.append(f"{label} = {mp.nstr(value.value, 15)} <= 1/2")

    logger.debug(
        f"Taylor certificate p0={float(p0)}: h={mp.nstr(h0.value, 15)}, h'={mp.nstr(h_prime.value, 12)}, "
        f"h''>={mp.nstr(curvature, 6)}, q={mp.nstr(q_end.value, 12)} -> {verdict.value}"
    )
    return TaylorCertificate(
        p0=p0,
        tau=spec.tau,
        n_terms=spec.n_terms,
        h_at_p0=h0,
        h_prime_at_p0=h_prime,
        second_derivative_lower_bound=-L,
        computed_second_derivative_bound=BoundedValue.exact(curvature),
        delta_max=delta_max,
        endpoint_values=(h0, q_end),
        verdict=verdict,
        note="; ".join(notes),
    )


# ============================================================================
# The three regimes
# ============================================================================

def _anchor(name: str, value: BoundedValue) -> AnchorCheck:
    bound = ANCHOR_BOUNDS[name]
    margin = value.margin_over(bound)
    return AnchorCheck(
        name=name,
        value=value,
        bound=bound,
        holds=bool(margin > 0),
        relative_margin=float(margin / to_mpf(bound)),
    )


def _large_p_regime(tau: Fraction) -> RegimeReport:
    """
    dA_1/dp = tau ln2 u exp(-tau u) with u = 2^-p, positive for every p. On the grid
    the derivative is certified positive; with tau u < 1 it falls as p grows, so
    each grid value bounds the derivative on the cell to its left.
    """
    anchor = _anchor("A1(2.2)", a_term(1, LARGE_P_START, tau))
    t = as_bounded(tau)
    ln2 = BoundedValue.exact(2).log()
    points = settings.verifier.derivative_grid
    step = (LARGE_P_GRID_END - LARGE_P_START) / (points - 1)
    lowest: Optional[BoundedValue] = None
    all_positive = True
    for k in range(points):
        u = BoundedValue.exact(2) ** -(LARGE_P_START + k * step)
        slope = t * ln2 * u * (-(t * u)).exp()
        all_positive = all_positive and slope.certainly_greater(0)
        if lowest is None or slope.value < lowest.value:
            lowest = slope
    u_max = BoundedValue.exact(2) ** -LARGE_P_START
    monotone_cells = (t * u_max).certainly_less(1)

    verdict = Verdict.PASS if anchor.holds and all_positive and monotone_cells else Verdict.FAIL
    detail = (
        f"A_1(2.2, {float(tau)}) = {mp.nstr(anchor.value.value, 12)}; min dA_1/dp on {points} points = "
        f"{mp.nstr(lowest.value, 8)}; tau 2^-2.2 < 1: {monotone_cells}; beyond p = 16 u exp(-tau u) > 0"
    )
    return RegimeReport(
        name="large-p",
        p_lo=LARGE_P_START,
        p_hi=None,
        tau=tau,
        verdict=verdict,
        anchors=[anchor],
        detail=detail,
    )


def _mid_regime() -> RegimeReport:
    spec = TruncatedSumSpec(n_terms=MID_TERMS, tau=MID_TAU, p_lo=MID_STEPS[0][0], p_hi=LARGE_P_START)
    certificates = [certify_interval(spec, p0, delta, MID_L) for p0, delta in MID_STEPS]
    first, second = certificates
    anchors = [
        _anchor("S10(2.001)", first.h_at_p0),
        _anchor("h'(2.001)", first.h_prime_at_p0),
        _anchor("q(2.001+0.099)", first.endpoint_values[1]),
        _anchor("S10(2.1)", second.h_at_p0),
        _anchor("h'(2.1)", second.h_prime_at_p0),
        _anchor("q(2.1+0.1)", second.endpoint_values[1]),
    ]
    return _regime_report("middle", spec, certificates, anchors)


def _near_regime() -> RegimeReport:
    spec = TruncatedSumSpec(n_terms=NEAR_TERMS, tau=NEAR_TAU, p_lo=NEAR_START, p_hi=NEAR_START + NEAR_DELTA)
    certificate = certify_interval(spec, NEAR_START, NEAR_DELTA, NEAR_L)
    anchors = [
        _anchor("S11(2+1e-7)", certificate.h_at_p0),
        _anchor("h'(2+1e-7)", certificate.h_prime_at_p0),
        _anchor("q(2+1e-7+0.001)", certificate.endpoint_values[1]),
    ]
    return _regime_report("near-two", spec, [certificate], anchors)


def _regime_report(
    name: str, spec: TruncatedSumSpec, certificates: List[TaylorCertificate], anchors: List[AnchorCheck]
) -> RegimeReport:
    passed = all(c.verdict is Verdict.PASS for c in certificates) and all(a.holds for a in anchors)
    return RegimeReport(
        name=name,
        p_lo=spec.p_lo,
        p_hi=spec.p_hi,
        tau=spec.tau,
        verdict=Verdict.PASS if passed else Verdict.FAIL,
        certificates=certificates,
        anchors=anchors,
    )


def _covered(regimes: List[RegimeReport]) -> bool:
    """Certified windows chain from 2 + 10^-7 to infinity without gaps."""
    windows = []
    for regime in regimes:
        if regime.certificates:
            windows += [(c.p0, c.p0 + c.delta_max) for c in regime.certificates]
        else:
            windows.append((regime.p_lo, regime.p_hi))
    windows.sort(key=lambda w: w[0])
    if not windows or windows[0][0] > NEAR_START:
        return False
    reach = windows[0][1]
    for lo, hi in windows[1:]:
        if reach is not None and lo > reach:
            return False
        reach = None if reach is None or hi is None else max(reach, hi)
    return reach is None


def verify_lemma_theta_half(large_p_tau: Any = None, digits: Optional[int] = None) -> LemmaReport:
    """
    Run the three regimes and the coverage check. `large_p_tau` replaces the
    tau of the large-p anchor (the reference value unless overridden).
    """
    tau = to_fraction(large_p_tau) if large_p_tau is not None else LARGE_P_TAU
    regimes: List[RegimeReport] = []
    with working_precision(digits):
        for name, runner in (
            ("large-p", lambda: _large_p_regime(tau)),
            ("middle", _mid_regime),
            ("near-two", _near_regime),
        ):
            try:
                regimes.append(runner())
            except IndeterminateError as e:
                logger.warning(f"Regime {name} undecided: {e}")
                regimes.append(
                    RegimeReport(name=name, p_lo=NEAR_START, p_hi=NEAR_START, tau=tau,
                                 verdict=Verdict.INDETERMINATE, detail=str(e))
                )

    coverage_ok = _covered(regimes)
    failing = next((r for r in regimes if r.verdict is not Verdict.PASS), None)
    if failing is not None:
        verdict = failing.verdict
        first_failure = failing.name
        if failing.certificates:
            bad = next((c for c in failing.certificates if c.verdict is not Verdict.PASS), None)
            if bad is not None:
                first_failure = f"{failing.name}: certificate at p0={float(bad.p0)} ({bad.note})"
        bad_anchor = next((a for a in failing.anchors if not a.holds), None)
        if bad_anchor is not None and first_failure == failing.name:
            first_failure = f"{failing.name}: anchor {bad_anchor.name} = {mp.nstr(bad_anchor.value.value, 12)}"
    elif not coverage_ok:
        verdict, first_failure = Verdict.FAIL, "coverage"
    else:
        verdict, first_failure = Verdict.PASS, None

    for r in regimes:
        logger.info(f"Theta lemma regime {r.name}: {r.verdict.value}")
    return LemmaReport(verdict=verdict, regimes=regimes, coverage_ok=coverage_ok, first_failure=first_failure)
