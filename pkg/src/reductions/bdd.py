"""
CVP to BDD.

The CVP lattice is stacked with a scaled copy s Z^d of the BDD gadget and
the target with s t 1_d. For a radius split w > 1 with alpha_G = alpha / w,
the block radii line up as
    r / (w alpha_G s) = r_dagger          (short vectors)
    (r^p - r'^p)^(1/p) / (alpha_G s) = r_dagger    (YES: many close vectors)
    (r^p - sigma r'^p)^(1/p) / (alpha_A s) = r_dagger   (NO: few close vectors)
so after sparsification a BDD oracle at distance alpha lambda1 finds a
vector within r of the target exactly in the YES case.
"""

import logging
from fractions import Fraction
from typing import Any, Callable, List, NamedTuple, Optional, Sequence, Tuple

from mpmath import mp

from ..config.settings import settings
from ..errors import InfeasibleError, InputError
from ..gadgets.bdd import bdd_gadget_params
from ..lattice.basis import build_lattice, contains
from ..lattice.enumeration import count_points, dist_p, lambda1_p
from ..lattice.oracles import at_most
from ..numerics.bounded import (
    BoundedValue,
    as_bounded,
    bounded_sum,
    rational_above,
    rational_below,
    to_fraction,
    working_precision,
)
from ..records.models import (
    BddQuery,
    BetaQuery,
    BoundCheck,
    ClaimCheck,
    CvpInstance,
    GadgetParams,
    GadgetVariant,
    LatticeDescription,
    NormSpec,
    PromiseClass,
    RationalMatrix,
    ReductionArtifacts,
)
from ..theta.counting import log_count_upper_bound, tightest_count_tau
from ..theta.rates import alpha_dagger, log_beta
from .sparsify import sample_prime, sparsify_with_target
from .svp import prime_interval

logger = logging.getLogger(__name__)

BddOracle = Callable[[LatticeDescription, Tuple[Fraction, ...]], Optional[Tuple[Fraction, ...]]]

RADIUS_MATCH_TOLERANCE = mp.mpf("1e-30")


class _BddPlan(NamedTuple):
    params: GadgetParams
    radius_pth: Any
    d: int
    scale: Fraction
    lattice: LatticeDescription
    target: Tuple[Fraction, ...]
    log_A: BoundedValue
    log_G: BoundedValue
    claims: List[ClaimCheck]


def _pth(x: Any, p: Fraction) -> Any:
    """x^p, exact for rational x and integer p."""
    if p.denominator == 1 and not isinstance(x, BoundedValue):
        return to_fraction(x) ** int(p)
    return as_bounded(x) ** p


def _log_ball_bound(p: Fraction, radius_pth: Any, m: int) -> BoundedValue:
    """log of the tightest theta bound on N(Z^m, r, 0)."""
    origin = [0] * m
    tau = tightest_count_tau(p, radius_pth, origin)
    return log_count_upper_bound(p, tau.value, radius_pth, origin)


def _gadget_dim(params: GadgetParams, p: Fraction, m: int, radius_pth: Any, alpha: Fraction) -> int:
    """Smallest d with phi0^d >= 2^m N(Z^m, r/alpha) and phi1^d >= 2^m N(Z^m, r)."""
    log_two_m = m * BoundedValue.exact(2).log()
    needs = (
        (log_two_m + _log_ball_bound(p, as_bounded(radius_pth) / _pth(alpha, p), m), params.phi0),
        (log_two_m + _log_ball_bound(p, radius_pth, m), params.phi1),
    )
    return max(1, max(int(mp.ceil(need.upper / phi.log().lower)) for need, phi in needs))


def _radius_claim(name: str, actual: BoundedValue, expected: BoundedValue) -> ClaimCheck:
    deviation = abs(actual / expected - 1)
    return ClaimCheck(
        name=name,
        holds=bool(deviation.upper < RADIUS_MATCH_TOLERANCE),
        exact=False,
        margin=mp.nstr(deviation.upper, 6),
    )


def _bdd_plan(
    cvp: CvpInstance, alpha: Fraction, params: Optional[GadgetParams], toy: bool, d: Optional[int] = None
) -> _BddPlan:
    p = cvp.norm.p
    if not cvp.lattice.generators.is_integral or any(x.denominator != 1 for x in cvp.target):
        raise InputError("the BDD reduction needs an integral CVP lattice and target")
    if d is not None and d < 1:
        raise InputError(f"gadget dimension must be positive, got d={d}")
    threshold = alpha_dagger(p)
    if not as_bounded(alpha).certainly_greater(threshold.upper):
        raise InfeasibleError(
            f"alpha = {alpha} is not above alpha_dagger({p}) = {mp.nstr(threshold.value, 8)}",
            kind="alpha-below-threshold",
        )
    sigma, r_prime = cvp.gamma_pth_power, cvp.radius_pth_power
    m = cvp.lattice.dim

    den = settings.reduction.radius_den
    w = rational_below((as_bounded(alpha) / threshold.value).sqrt(), den)
    if w <= 1:
        raise InfeasibleError(f"alpha = {alpha} leaves no room between alpha_dagger and alpha")
    alpha_G = rational_below(as_bounded(alpha) / w, den)
    w_pth = _pth(w, p)
    inner = as_bounded(w_pth - sigma * (w_pth - 1))
    if not inner.certainly_greater(0):
        raise InfeasibleError(f"gap sigma = {sigma} is too wide for alpha = {alpha}", kind="parameter-infeasible")
    alpha_A = rational_above(inner.root(p) * alpha_G, den)
    if alpha_A >= alpha_G:
        raise InfeasibleError("alpha_A rounds up to alpha_G", kind="parameter-infeasible")
    params = params or bdd_gadget_params(p, alpha_A, alpha_G)
    if params.variant is not GadgetVariant.BDD:
        raise InputError("the BDD reduction needs a BDD gadget")

    ratio = w_pth / (w_pth - 1)
    radius_pth = ratio * r_prime if isinstance(ratio, Fraction) else rational_above(ratio * r_prime, den)
    if d is None and toy:
        d = settings.reduction.toy_dim
    elif d is None:
        d = _gadget_dim(params, p, m, radius_pth, alpha)
        if d > settings.budget.max_build_dim:
            raise InfeasibleError(
                f"gadget dimension d={d} exceeds the build budget of {settings.budget.max_build_dim}",
                kind="infeasible-at-this-scale",
                d=d,
            )

    r_dagger = (params.C_r_pth_power * d).root(p)
    scale = rational_below(as_bounded(radius_pth - r_prime).root(p) / (alpha_G * r_dagger), den)
    if scale <= 0:
        raise InfeasibleError("gadget scale rounds to zero")
    scale_b = as_bounded(scale)
    radius = as_bounded(radius_pth).root(p)
    claims = [
        _radius_claim("short-radius-match", radius / (as_bounded(w) * alpha_G * scale_b), r_dagger),
        _radius_claim(
            "yes-radius-match", as_bounded(radius_pth - r_prime).root(p) / (alpha_G * scale_b), r_dagger
        ),
        _radius_claim(
            "no-radius-match",
            as_bounded(radius_pth - sigma * r_prime).root(p) / (alpha_A * scale_b),
            r_dagger,
        ),
    ]

    columns = [list(b) + [0] * d for b in cvp.lattice.basis.columns()]
    columns += [[0] * m + [scale if i == j else 0 for i in range(d)] for j in range(d)]
    lattice = build_lattice(RationalMatrix.from_columns(columns))
    target = tuple(cvp.target) + tuple(scale * params.t for _ in range(d))

    C_r = params.C_r
    log_G = (d * log_beta(BetaQuery(p=p, t=params.t, a=rational_below(alpha_G * C_r)))).as_heuristic()
    close = _log_ball_bound(p, radius_pth, m) + d * log_beta(
        BetaQuery(p=p, t=params.t, a=rational_above(alpha_A * C_r))
    )
    short = _log_ball_bound(p, as_bounded(radius_pth) / _pth(alpha, p), m) + d * log_beta(
        BetaQuery(p=p, t=0, a=rational_above(C_r))
    )
    log_A = close if close.value >= short.value else short
    return _BddPlan(params, radius_pth, d, scale, lattice, target, log_A, log_G, claims)


def build_bdd_query(
    cvp: CvpInstance,
    alpha: Any,
    params: Optional[GadgetParams] = None,
    seed: Optional[int] = None,
    toy: bool = False,
    dry_run: bool = False,
) -> Tuple[Optional[BddQuery], Any, ReductionArtifacts]:
    """
    Block lattice, sparsification and shifted target for one BDD call.
    Returns the query (None on a dry run), the decision radius r^p and the artifacts.
    """
    alpha = to_fraction(alpha)
    with working_precision():
        plan = _bdd_plan(cvp, alpha, params, toy)
    gap = (plan.log_G - plan.log_A).certainly_greater(cvp.lattice.dim * BoundedValue.exact(2).log())
    interval = (2, settings.reduction.toy_prime_cap) if toy else prime_interval(plan.log_A, plan.log_G)
    q = None
    if not dry_run:
        if interval is None:
            raise InfeasibleError("the prime interval exceeds the sampling budget", kind="infeasible-at-this-scale")
        q = sample_prime(*interval, seed=seed)

    artifacts = ReductionArtifacts(
        kind="cvp-to-bdd",
        log_A=plan.log_A,
        log_G=plan.log_G,
        gap_holds=gap,
        d=plan.d,
        q=q,
        prime_interval=interval,
        scaling=plan.scale,
        radius_pth_power=plan.radius_pth,
        gamma_pth_power=cvp.gamma_pth_power,
        claims=plan.claims,
        seed=seed,
        toy=toy,
    )
    if dry_run:
        return None, plan.radius_pth, artifacts

    sparse, shifted = sparsify_with_target(plan.lattice, plan.target, q, seed=seed)
    query = BddQuery(lattice=sparse, target=shifted, alpha=alpha, norm=cvp.norm, toy=toy)
    logger.debug(f"BDD query: rank {sparse.rank}, d={plan.d}, q={q}, s={plan.scale}")
    return query, plan.radius_pth, artifacts


def exact_cvp_oracle(norm: NormSpec) -> BddOracle:
    """An oracle answering every query with an exact closest vector."""

    def oracle(lattice: LatticeDescription, target: Tuple[Fraction, ...]) -> Optional[Tuple[Fraction, ...]]:
        return dist_p(lattice, norm, target).witness

    return oracle


def promise_holds(query: BddQuery) -> bool:
    """dist(t, L)^p <= alpha^p lambda1(L)^p"""
    dist = dist_p(query.lattice, query.norm, query.target).distance_pth_power
    lam = lambda1_p(query.lattice, query.norm).distance_pth_power
    return at_most(dist, _pth(query.alpha, query.norm.p) * lam)


def _distance_pth(v: Sequence[Fraction], target: Sequence[Fraction], p: Fraction) -> Any:
    if p.denominator == 1:
        return sum((abs(a - b) ** int(p) for a, b in zip(v, target)), Fraction(0))
    return bounded_sum(as_bounded(abs(a - b)) ** p for a, b in zip(v, target) if a != b)


def cvp_to_bdd_decide(
    cvp: CvpInstance,
    alpha: Any,
    oracle: BddOracle,
    params: Optional[GadgetParams] = None,
    seed: Optional[int] = None,
    toy: bool = False,
) -> PromiseClass:
    """YES iff the oracle returns a lattice vector within r of the shifted target."""
    query, radius_pth, _ = build_bdd_query(cvp, alpha, params=params, seed=seed, toy=toy)
    answer = oracle(query.lattice, query.target)
    if answer is None or len(answer) != query.lattice.dim or not contains(query.lattice, answer):
        return PromiseClass.NO
    v = tuple(to_fraction(x) for x in answer)
    if at_most(_distance_pth(v, query.target, cvp.norm.p), radius_pth):
        return PromiseClass.YES
    return PromiseClass.NO


def bdd_counting_report(
    cvp: CvpInstance,
    alpha: Any,
    params: Optional[GadgetParams] = None,
    toy: bool = True,
    d: Optional[int] = None,
) -> List[BoundCheck]:
    """
    Exact counts of the unsparsified block lattice against the block bounds
        N(L, r/alpha, 0) <= N(Z^m, r/alpha, 0) N(Z^d, r^p / (alpha s)^p, 0)
        YES: N(L, r, t) >= N(Z^d, (r^p - r'^p) / s^p, t 1)
        NO:  N(L, r, t) <= N(Z^m, r, 0) N(Z^d, (r^p - sigma r'^p) / s^p, t 1)
    Integer p only; the radii are exact rationals. `d` overrides the gadget dimension.
    """
    p = cvp.norm.p
    if p.denominator != 1:
        raise InputError("block count checks need an integer p")
    alpha = to_fraction(alpha)
    with working_precision():
        plan = _bdd_plan(cvp, alpha, params, toy, d)
    norm, m, d, t = cvp.norm, cvp.lattice.dim, plan.d, plan.params.t
    r_pth, s_pth, alpha_pth = plan.radius_pth, plan.scale ** int(p), alpha ** int(p)
    r_prime, sigma = cvp.radius_pth_power, cvp.gamma_pth_power
    cube = build_lattice(RationalMatrix.identity(d))
    ambient = build_lattice(RationalMatrix.identity(m))

    def block_count(radius_pth: Fraction, shift: Fraction) -> int:
        return count_points(cube, norm, [shift] * d, radius_pth) if radius_pth >= 0 else 0

    dist = dist_p(cvp.lattice, norm, cvp.target).distance_pth_power
    is_yes, is_no = dist <= r_prime, dist > sigma * r_prime

    short = count_points(plan.lattice, norm, [0] * plan.lattice.dim, r_pth / alpha_pth)
    short_bound = count_points(ambient, norm, [0] * m, r_pth / alpha_pth) * block_count(
        r_pth / (alpha_pth * s_pth), Fraction(0)
    )
    close = count_points(plan.lattice, norm, plan.target, r_pth)
    yes_bound = block_count((r_pth - r_prime) / s_pth, t)
    no_bound = count_points(ambient, norm, [0] * m, r_pth) * block_count((r_pth - sigma * r_prime) / s_pth, t)

    checks = [
        BoundCheck(name="block-short-upper", observed=short, bound=short_bound, holds=short <= short_bound),
        BoundCheck(
            name="block-yes-lower", observed=close, bound=yes_bound, holds=close >= yes_bound or not is_yes,
            applicable=is_yes,
        ),
        BoundCheck(
            name="block-no-upper", observed=close, bound=no_bound, holds=close <= no_bound or not is_no,
            applicable=is_no,
        ),
    ]
    for c in checks:
        logger.debug(f"BDD block count {c.name}: {c.observed} vs {c.bound} (applicable={c.applicable})")
    return checks
