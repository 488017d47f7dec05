"""
One-dimensional theta series and its moment.

    theta(p, tau, t) = sum_z exp(-tau |z - t|^p)
    mu(p, tau, t)    = sum_z |z - t|^p exp(-tau |z - t|^p) / theta

Sums run over |z| <= Z with Z chosen so the geometric tail bound falls
below the working precision. p = 1 uses the closed forms.
"""

import logging
from functools import lru_cache
from typing import Any, Callable, Optional, Tuple

from mpmath import mp, mpf

from ..config.settings import settings
from ..errors import BudgetExceededError, NoSolutionError, NumericAssertionError
from ..numerics.bounded import (
    BoundedValue,
    Comparison,
    as_bounded,
    to_mpf,
    unit_roundoff,
    working_precision,
)
from ..records.models import ThetaParams

logger = logging.getLogger(__name__)

TAU_FLOOR = mpf("1e-12")
TAU_CEILING = mpf("1e12")


def _key(x: Any) -> Any:
    return x.value if isinstance(x, BoundedValue) else x


def _truncation_radius(p: mpf, tau: mpf, want_moment: bool) -> int:
    """Smallest Z whose tail bound lands below 10^-(dps+5)."""
    q = mp.exp(-tau)
    target = mp.log(4) - mp.log(-mp.expm1(-tau)) + (mp.dps + 5) * mp.log(10)
    if want_moment:
        target += 2 * mp.log(target / tau + 2) - 2 * mp.log(1 - q)
    z = int(mp.ceil((target / tau) ** (1 / p) - mpf(0.5)))
    z = max(z, 1, int(mp.ceil((1 / tau) ** (1 / p))))
    if 2 * z + 1 > settings.budget.max_series_terms:
        raise BudgetExceededError(
            f"theta series at tau={mp.nstr(tau, 6)}, p={mp.nstr(p, 6)} needs {2 * z + 1} terms",
            terms=2 * z + 1,
        )
    return z


def _tail_bounds(p: mpf, tau: mpf, z: int) -> Tuple[mpf, mpf]:
    """Bounds on the omitted theta mass and moment mass beyond |z| > Z."""
    q = mp.exp(-tau)
    y0 = (mpf(z) + mpf(0.5)) ** p
    head = 2 * mp.exp(-tau * y0)
    theta_tail = head / (1 - q)
    # y e^{-tau y} is decreasing once y >= 1/tau
    moment_tail = head * (y0 / (1 - q) + q / (1 - q) ** 2)
    return theta_tail, moment_tail


@lru_cache(maxsize=8192)
def _series(p: Any, tau: Any, t: Any, dps: int) -> Tuple[BoundedValue, BoundedValue]:
    """(theta, moment sum) at the current working precision."""
    pm, taum, tm = to_mpf(p), to_mpf(tau), to_mpf(t)
    u = unit_roundoff()
    z_max = _truncation_radius(pm, taum, want_moment=True)

    total = mpf(0)
    moment = mpf(0)
    err_total = mpf(0)
    err_moment = mpf(0)
    for z in range(-z_max, z_max + 1):
        x = abs(z - tm)
        if x == 0:
            total += 1
            continue
        xp = mp.power(x, pm)
        y = taum * xp
        term = mp.exp(-y)
        rel = u * (8 + y * (2 * abs(pm * mp.log(x)) + 4 * pm + 8))
        total += term
        moment += xp * term
        err_total += term * rel
        err_moment += xp * term * (rel + 2 * u)
    terms = 2 * z_max + 1
    err_total += terms * u * total
    err_moment += terms * u * moment

    theta_tail, moment_tail = _tail_bounds(pm, taum, z_max)
    theta_bv = BoundedValue.model_construct(
        value=total, abs_error=err_total + theta_tail, log_scale=False, heuristic=False
    )
    moment_bv = BoundedValue.model_construct(
        value=moment, abs_error=err_moment + moment_tail, log_scale=False, heuristic=False
    )
    return theta_bv, moment_bv


def _closed_form_p1(tau: Any, t: Any) -> Tuple[BoundedValue, BoundedValue]:
    """Theta and mu for p = 1 from the two geometric series."""
    tau_b, t_b = as_bounded(tau), as_bounded(t)
    q = (-tau_b).exp()
    near = (-(tau_b * t_b)).exp()
    far = (-(tau_b * (1 - t_b))).exp()
    theta_val = (near + far) / (1 - q)
    mu_val = (t_b * near + (1 - t_b) * far) / (near + far) + q / (1 - q)
    return theta_val, mu_val


def _evaluate(params: ThetaParams) -> Tuple[BoundedValue, BoundedValue]:
    if params.p == 1:
        return _closed_form_p1(params.tau, params.t)
    theta_val, moment = _series(_key(params.p), _key(params.tau), _key(params.t), mp.dps)
    return theta_val, moment / theta_val


def theta(params: ThetaParams, digits: Optional[int] = None) -> BoundedValue:
    """Theta series with a rigorous truncation plus rounding error."""
    with working_precision(digits):
        return _evaluate(params)[0]


def mu(params: ThetaParams, digits: Optional[int] = None) -> BoundedValue:
    """Mean of |X|^p under the discrete distribution weighted by exp(-tau |z - t|^p)."""
    with working_precision(digits):
        return _evaluate(params)[1]


def theta_mu(params: ThetaParams, digits: Optional[int] = None) -> Tuple[BoundedValue, BoundedValue]:
    with working_precision(digits):
        return _evaluate(params)


def bisect_decreasing(
    fn: Callable[[mpf], BoundedValue],
    target: BoundedValue,
    what: str,
    start: mpf = mpf(1),
) -> Tuple[mpf, mpf]:
    """
    Bracket the root of fn(tau) = target for fn strictly decreasing in tau.

    Returns (lo, hi) with fn(lo) > target > fn(hi) decided. Bisection stops at
    relative width 10^-(dps/2 + 5) or as soon as a comparison is undecidable.
    """
    def side(x: mpf) -> Comparison:
        return fn(x).compare(target)

    lo = hi = start
    while side(lo) is not Comparison.GREATER:
        lo = lo / 2
        if lo < TAU_FLOOR:
            raise NoSolutionError(f"{what}: no tau above {mp.nstr(TAU_FLOOR, 3)} reaches the target")
    while side(hi) is not Comparison.LESS:
        hi = hi * 2
        if hi > TAU_CEILING:
            raise NoSolutionError(f"{what}: no tau below {mp.nstr(TAU_CEILING, 3)} reaches the target")

    f_lo, f_hi = fn(lo), fn(hi)
    tolerance = mpf(10) ** (-(mp.dps // 2 + 5))
    steps = 0
    while hi - lo > tolerance * hi:
        mid = (lo + hi) / 2
        f_mid = fn(mid)
        if f_mid.certainly_greater(f_lo) or f_mid.certainly_less(f_hi):
            raise NumericAssertionError(
                f"{what}: monotonicity violated near tau={mp.nstr(mid, 12)}", tau=mid
            )
        c = f_mid.compare(target)
        if c is Comparison.GREATER:
            lo, f_lo = mid, f_mid
        elif c is Comparison.LESS:
            hi, f_hi = mid, f_mid
        else:
            break
        steps += 1
    logger.debug(f"{what}: bracket [{mp.nstr(lo, 15)}, {mp.nstr(hi, 15)}] after {steps} steps")
    return lo, hi


def mu_inverse_tau(p: Any, t: Any, target: Any, digits: Optional[int] = None) -> BoundedValue:
    """tau* with mu(p, tau*, t) = target, by bisection on the decreasing map tau -> mu."""
    with working_precision(digits):
        shape = ThetaParams(p=p, tau=1, t=t)
        floor = as_bounded(shape.t) ** shape.p if shape.t != 0 else BoundedValue.exact(0)
        goal = as_bounded(target)
        if not goal.certainly_greater(floor):
            raise NoSolutionError(
                f"target {mp.nstr(goal.value, 12)} is not above the large-tau limit {mp.nstr(floor.value, 12)}"
            )

        def fn(tau: mpf) -> BoundedValue:
            return _evaluate(ThetaParams(p=shape.p, tau=tau, t=shape.t))[1]

        lo, hi = bisect_decreasing(fn, goal, "mu_inverse_tau")
        return BoundedValue(value=(lo + hi) / 2, abs_error=(hi - lo) / 2)


def theta_second_derivative_at_zero(p: Any, tau: Any, digits: Optional[int] = None) -> Tuple[BoundedValue, bool]:
    """
    d^2/dt^2 theta(p, tau, t) at t = 0 and whether every summand is nonnegative.

    Summands are p tau e^{-tau z^p} z^{p-2} (p tau z^p - (p - 1)) over z != 0;
    they are all nonnegative exactly when tau >= 1 - 1/p.
    """
    with working_precision(digits):
        params = ThetaParams(p=p, tau=tau, t=0)
        pm, taum = to_mpf(params.p), to_mpf(params.tau)
        u = unit_roundoff()
        z_max = _truncation_radius(pm, taum, want_moment=True)
        z_max = max(z_max, int(mp.ceil((2 / taum) ** (1 / pm))) + 1)

        total = mpf(0)
        err = mpf(0)
        for z in range(1, z_max + 1):
            zp = mp.power(z, pm)
            y = taum * zp
            weight = pm * taum * mp.exp(-y) * mp.power(z, pm - 2)
            term = weight * (pm * taum * zp - (pm - 1))
            scale = weight * (pm * taum * zp + pm)
            total += 2 * term
            err += 2 * scale * u * (16 + y * (2 * abs(pm * mp.log(z)) + 4 * pm + 8))
        err += 2 * z_max * u * abs(total)

        # z^{2p-2} e^{-tau z^p} <= y^2 e^{-tau y}, decreasing for y >= 2/tau
        q = mp.exp(-taum)
        y0 = mpf(z_max + 1) ** pm
        tail = 2 * pm * taum * (pm * taum + pm) * mp.exp(-taum * y0) * (y0 + 1 / (1 - q)) ** 2 / (1 - q)

        nonnegative = params.tau >= 1 - 1 / params.p
        return BoundedValue(value=total, abs_error=err + tail), bool(nonnegative)
