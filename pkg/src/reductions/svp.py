"""
MAXLIN to SVP through a block lattice.

The CVP instance (B', t', r') is glued to an integer gadget (alpha I_d,
alpha t 1_d) with a unit coordinate, giving a lattice in m + d + 1 dimensions
whose short-vector count separates YES from NO instances. A random
sparsification at a prime q between sqrt(A G)/42 and 42 sqrt(A G) then
keeps a short vector only in the YES case.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

from mpmath import mp

from ..config.settings import settings
from ..errors import InfeasibleError, InputError
from ..gadgets.svp import svp_gadget_params
from ..lattice.basis import build_lattice, contains
from ..lattice.enumeration import count_points, dist_p
from ..lattice.oracles import at_most
from ..numerics.bounded import (
    BoundedValue,
    Comparison,
    as_bounded,
    rational_below,
    to_fraction,
    working_precision,
)
from ..records.models import (
    BoundCheck,
    ClaimCheck,
    CvpInstance,
    GadgetParams,
    GadgetVariant,
    LatticeDescription,
    MaxLinInstance,
    NormSpec,
    RationalMatrix,
    ReductionArtifacts,
    SvpInstance,
    ThetaParams,
    format_fraction,
)
from ..theta.series import mu_inverse_tau, theta
from .maxlin import maxlin_to_cvp
from .sparsify import sample_prime, sparsify

logger = logging.getLogger(__name__)

PRIME_WINDOW = 42
MAX_PRIME_BITS = 4096
MAX_SEARCH_M = 2 ** 24


class _Plan(NamedTuple):
    radius_pth: Fraction
    gamma_pth: Fraction
    scale_pth: Fraction  # (alpha r_dagger)^p
    K: BoundedValue
    d: int
    alpha: Fraction
    log_A: BoundedValue
    log_G: BoundedValue
    claims: List[ClaimCheck]


def cvp_to_counting_lattice(
    cvp: CvpInstance, gadget_basis: RationalMatrix, gadget_target: Sequence[Any]
) -> LatticeDescription:
    """Block lattice with columns (B', 0, 0), (0, B_gadget, 0) and (-t', -t_gadget, 1)."""
    if not cvp.lattice.generators.is_integral or any(x.denominator != 1 for x in cvp.target):
        raise InputError("the counting lattice needs an integral CVP lattice and target")
    if not contains(cvp.lattice, [2 * x for x in cvp.target]):
        raise InputError("twice the CVP target is not a lattice vector", kind="hypothesis-violated")
    if len(gadget_target) != gadget_basis.rows:
        raise InputError("gadget target dimension differs from the gadget dimension")

    m, d = cvp.lattice.dim, gadget_basis.rows
    columns = [list(b) + [0] * d + [0] for b in cvp.lattice.basis.columns()]
    columns += [[0] * m + list(g) + [0] for g in gadget_basis.columns()]
    columns.append([-x for x in cvp.target] + [-to_fraction(x) for x in gadget_target] + [1])
    lattice = build_lattice(RationalMatrix.from_columns(columns))
    logger.debug(f"Counting lattice: dimension {lattice.dim}, rank {lattice.rank}")
    return lattice


# ============================================================================
# Parameters and count estimates
# ============================================================================

def _gamma_pth(delta: Fraction, sigma: Fraction) -> Fraction:
    spread = (as_bounded(sigma).sqrt() - 1) ** 2 / 2
    step = min(rational_below(spread), Fraction(1, 100))
    if step <= 0:
        raise InfeasibleError(f"gap sigma={sigma} is too close to 1 for a rational gamma")
    return 1 + delta * step


def _ball_constant(p: Fraction, radius_pth: Fraction, m: int) -> BoundedValue:
    """K with N(Z^m, R, 0) <= K^m: exp(tau R/m) theta(tau, 0) at the tau where mu(tau, 0) = R/m."""
    per_coordinate = radius_pth / m
    tau = mu_inverse_tau(p, 0, per_coordinate).value
    return (as_bounded(per_coordinate) * tau).exp() * theta(ThetaParams(p=p, tau=tau, t=0))


def _gadget_dim(K: BoundedValue, params: GadgetParams, m: int) -> int:
    goal = (3 * K).log()
    per_m = max(int(mp.ceil((goal / phi.log()).upper)) for phi in (params.phi0, params.phi1))
    return max(1, per_m) * m


def _claims(
    radius_pth: Fraction, r_prime_pth: Fraction, gamma_pth: Fraction, sigma: Fraction, delta: Fraction
) -> List[ClaimCheck]:
    scale = 2 * r_prime_pth / delta
    far = gamma_pth * radius_pth
    identity = radius_pth - 1 - r_prime_pth == (1 - delta) * scale
    third_rhs = (1 - delta * as_bounded(sigma).sqrt()) * scale
    third_lhs = far - sigma * r_prime_pth
    third = as_bounded(third_lhs).compare(third_rhs)
    return [
        ClaimCheck(name="gadget-radius-identity", holds=identity, exact=True, margin="0" if identity else None),
        ClaimCheck(
            name="far-radius-inside-gadget",
            holds=far <= scale,
            exact=True,
            margin=format_fraction(scale - far),
        ),
        ClaimCheck(
            name="far-radius-after-cvp-gap",
            holds=third is Comparison.LESS,
            exact=False,
            margin=mp.nstr(as_bounded(third_rhs).margin_over(third_lhs), 12),
        ),
    ]


def _log_counts(
    p: Fraction,
    m: int,
    r_prime_pth: Fraction,
    sigma: Fraction,
    params: GadgetParams,
    far: Fraction,
    alpha: Fraction,
    d: int,
    K: BoundedValue,
) -> Tuple[BoundedValue, BoundedValue]:
    """
    log G from the gadget count rate (heuristic: the sub-exponential factor
    is dropped) and a theta upper bound on log A.
    """
    tau = as_bounded(params.tau)
    log_theta = theta(ThetaParams(p=p, tau=params.tau, t=params.t)).log()
    log_rho = params.rho.log()
    alpha_pth = as_bounded(alpha) ** p

    log_G = (d * (tau * params.mu + log_theta)).as_heuristic()
    odd = tau * (as_bounded(far - sigma * r_prime_pth) / alpha_pth) + d * log_theta
    even = tau * (as_bounded(far) / alpha_pth) + d * (log_theta - log_rho)
    high, low = (odd, even) if odd.value >= even.value else (even, odd)
    combined = high + (1 + (low - high).exp()).log()
    log_A = (as_bounded(far).root(p) + 4).log() + m * K.log() + combined
    return log_A, log_G


def _plan(
    p: Fraction, m: int, r_prime_pth: Fraction, sigma: Fraction, params: GadgetParams, d: Optional[int] = None
) -> _Plan:
    delta = params.delta
    radius_pth = 1 + (1 - delta / 2) * 2 * r_prime_pth / delta
    gamma_pth = _gamma_pth(delta, sigma)
    scale_pth = 2 * r_prime_pth / delta
    far = gamma_pth * radius_pth
    K = _ball_constant(p, far, m)
    d = d or _gadget_dim(K, params, m)
    r_dagger_pth = params.C_r_pth_power * d
    alpha = rational_below((as_bounded(scale_pth) / r_dagger_pth).root(p))
    if alpha <= 0:
        raise InfeasibleError("gadget scaling rounds to zero")
    log_A, log_G = _log_counts(p, m, r_prime_pth, sigma, params, far, alpha, d, K)
    claims = _claims(radius_pth, r_prime_pth, gamma_pth, sigma, delta)
    return _Plan(radius_pth, gamma_pth, scale_pth, K, d, alpha, log_A, log_G, claims)


def _gap_holds(plan: _Plan, m: int) -> bool:
    gap = plan.log_G - plan.log_A - m * BoundedValue.exact(2).log()
    return gap.certainly_greater(0)


@lru_cache(maxsize=32)
def _min_feasible_m(p: Fraction, per_equation: Fraction, sigma: Fraction, params: GadgetParams) -> Optional[int]:
    """Smallest m, with r'^p = per_equation * m, where every claim and the count gap hold."""

    def feasible(k: int) -> bool:
        plan = _plan(p, k, per_equation * k, sigma, params)
        return all(c.holds for c in plan.claims) and _gap_holds(plan, k)

    with working_precision(settings.verifier.explorer_digits):
        hi = 1
        while not feasible(hi):
            hi *= 2
            if hi > MAX_SEARCH_M:
                return None
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if feasible(mid):
                hi = mid
            else:
                lo = mid
    return hi


def svp_parameters(
    p: Any,
    m: int,
    radius_pth_power: Any,
    sigma: Any,
    params: GadgetParams,
    strict: bool = False,
    d: Optional[int] = None,
) -> ReductionArtifacts:
    """
    Radii, gadget dimension and the count estimates A, G for a MAXLIN-derived
    CVP instance with m equations and r'^p = radius_pth_power. No lattice is
    built, so m may be far past the enumeration budget.
    """
    p, sigma, r_prime_pth = to_fraction(p), to_fraction(sigma), to_fraction(radius_pth_power)
    if params.variant is not GadgetVariant.SVP:
        raise InputError("the SVP reduction needs an SVP gadget")
    if params.p != p:
        raise InputError(f"gadget built for p={params.p}, instance uses p={p}")
    if params.sigma is not None and params.sigma != sigma:
        raise InputError(f"gadget built for sigma={params.sigma}, instance has gamma^p={sigma}")
    if m < 1:
        raise InputError(f"need at least one equation, got m={m}")

    plan = _plan(p, m, r_prime_pth, sigma, params, d)
    failed = [c.name for c in plan.claims if not c.holds]
    min_m = _min_feasible_m(p, r_prime_pth / m, sigma, params)
    if failed:
        logger.warning(f"Radius claims fail at m={m}: {failed} (smallest feasible m: {min_m})")
        if strict:
            raise InfeasibleError(
                f"radius claims {failed} fail at m={m}", kind="claim-violated", min_feasible_m=min_m
            )

    gap = _gap_holds(plan, m)
    logger.info(
        f"SVP reduction m={m}: d={plan.d}, log A={mp.nstr(plan.log_A.value, 8)}, "
        f"log G={mp.nstr(plan.log_G.value, 8)}, G >= 2^m A: {gap}"
    )
    return ReductionArtifacts(
        kind="maxlin-to-svp",
        log_A=plan.log_A,
        log_G=plan.log_G,
        gap_holds=gap,
        d=plan.d,
        scaling=plan.alpha,
        alpha_pth_power=plan.alpha ** int(p) if p.denominator == 1 else None,
        radius_pth_power=plan.radius_pth,
        gamma_pth_power=plan.gamma_pth,
        K=plan.K,
        delta=params.delta,
        claims=plan.claims,
        min_feasible_m=min_m,
    )


def compute_svp_A_G(
    cvp: CvpInstance, params: GadgetParams, strict: bool = False, d: Optional[int] = None
) -> ReductionArtifacts:
    """
    svp_parameters for a CVP instance produced from MAXLIN. `d` overrides the
    gadget dimension (toy runs). With strict set, a failed radius claim raises
    instead of being recorded.
    """
    return svp_parameters(
        cvp.norm.p, cvp.lattice.dim, cvp.radius_pth_power, cvp.gamma_pth_power, params, strict=strict, d=d
    )


def prime_interval(log_A: BoundedValue, log_G: BoundedValue) -> Optional[Tuple[int, int]]:
    """[sqrt(A G)/42, 42 sqrt(A G)] as integers, or None past MAX_PRIME_BITS."""
    log_mid = (log_A + log_G) / 2
    window = mp.log(PRIME_WINDOW)
    if log_mid.upper + window > MAX_PRIME_BITS * mp.log(2):
        return None
    lo = max(2, int(mp.floor(mp.exp(log_mid.lower - window))))
    hi = max(lo, int(mp.ceil(mp.exp(log_mid.upper + window))))
    return lo, hi


def maxlin_to_svp(
    inst: MaxLinInstance,
    norm: NormSpec,
    params: Optional[GadgetParams] = None,
    seed: Optional[int] = None,
    toy: bool = False,
    dry_run: bool = False,
) -> Tuple[Optional[SvpInstance], ReductionArtifacts]:
    """
    Full MAXLIN to SVP chain. A dry run stops after the parameters; toy runs
    use `toy_dim` for d and a prime of at most `toy_prime_cap`.
    """
    if norm.p <= 2:
        raise InputError(f"the SVP reduction needs p > 2, got {norm.p}")
    cvp = maxlin_to_cvp(inst, norm)
    params = params or svp_gadget_params(norm.p, cvp.gamma_pth_power)
    artifacts = compute_svp_A_G(cvp, params, d=settings.reduction.toy_dim if toy else None)

    if toy:
        interval = (2, settings.reduction.toy_prime_cap)
    else:
        if artifacts.d > settings.budget.max_build_dim and not dry_run:
            raise InfeasibleError(
                f"gadget dimension d={artifacts.d} exceeds the build budget of {settings.budget.max_build_dim}",
                kind="infeasible-at-this-scale",
                d=artifacts.d,
            )
        interval = prime_interval(artifacts.log_A, artifacts.log_G)

    q = None
    if not dry_run:
        if interval is None:
            raise InfeasibleError("the prime interval exceeds the sampling budget", kind="infeasible-at-this-scale")
        q = sample_prime(*interval, seed=seed)
    artifacts = artifacts.model_copy(update={"q": q, "prime_interval": interval, "seed": seed, "toy": toy})
    if dry_run:
        return None, artifacts

    alpha = artifacts.scaling
    gadget = RationalMatrix.identity(artifacts.d, alpha)
    lattice = cvp_to_counting_lattice(cvp, gadget, [alpha * params.t] * artifacts.d)
    sparse = sparsify(lattice, q, seed=seed)
    svp = SvpInstance(
        lattice=sparse,
        radius_pth_power=artifacts.radius_pth_power,
        gamma_pth_power=artifacts.gamma_pth_power,
        norm=norm,
        toy=toy,
    )
    logger.info(f"MAXLIN -> SVP: rank {sparse.rank}, q={q}, toy={toy}")
    return svp, artifacts


# ============================================================================
# Exact check of the block-lattice counts
# ============================================================================

def lemma_counting_report(
    cvp: CvpInstance,
    gadget_basis: RationalMatrix,
    gadget_target: Sequence[Any],
    good_radius_pth: Fraction,
    annoying_radius_pth: Fraction,
) -> List[BoundCheck]:
    """
    Enumerated counts of the block lattice against the YES lower bound
    N(L, r_G, 0) >= N(gadget, r_G^p - 1 - r'^p, t_gadget) and the NO upper bound
    (r_A + 4) N(Z^m, r_A, 0) (max over l1 + max over even l0 of gadget counts).
    """
    lattice = cvp_to_counting_lattice(cvp, gadget_basis, gadget_target)
    norm, p = cvp.norm, cvp.norm.p
    gadget = build_lattice(gadget_basis)
    m = cvp.lattice.dim
    r_prime, sigma = cvp.radius_pth_power, cvp.gamma_pth_power
    target = [to_fraction(x) for x in gadget_target]
    origin = [0] * lattice.dim

    dist = dist_p(cvp.lattice, norm, cvp.target).distance_pth_power
    is_yes = at_most(dist, r_prime)
    is_no = not at_most(dist, sigma * r_prime)

    def gadget_count(ell: int, radius_pth: Fraction) -> int:
        if radius_pth < 0:
            return 0
        return count_points(gadget, norm, [ell * x for x in target], radius_pth)

    checks: List[BoundCheck] = []
    observed = count_points(lattice, norm, origin, good_radius_pth)
    bound = gadget_count(1, good_radius_pth - 1 - r_prime)
    checks.append(
        BoundCheck(
            name="block-yes-lower",
            observed=observed,
            bound=bound,
            holds=observed >= bound or not is_yes,
            applicable=is_yes,
        )
    )

    observed = count_points(lattice, norm, origin, annoying_radius_pth)
    with working_precision():
        r_A = as_bounded(annoying_radius_pth).root(p)
        reach = int(mp.floor(r_A.upper)) + 1
        ells = range(-reach, reach + 1)
        odd_part = max(gadget_count(ell, annoying_radius_pth - sigma * r_prime) for ell in ells)
        even_part = max(gadget_count(ell, annoying_radius_pth) for ell in ells if ell % 2 == 0)
        base = count_points(build_lattice(RationalMatrix.identity(m)), norm, [0] * m, annoying_radius_pth)
        bound = (r_A + 4) * base * (odd_part + even_part)
        holds = not as_bounded(observed).certainly_greater(bound)
    checks.append(
        BoundCheck(
            name="block-no-upper",
            observed=observed,
            bound=float(bound.upper),
            holds=holds or not is_no,
            applicable=is_no,
            detail=f"max odd={odd_part}, max even={even_part}, N(Z^m)={base}",
        )
    )
    return checks
