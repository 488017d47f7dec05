"""
Gadget constants for the BDD reduction.

A shift t and radius coefficient C_r give, in Z^d with r = C_r d^{1/p},
    N(alpha_G r, t 1) >= phi0^d N(r, 0)   and   N(alpha_G r, t 1) >= phi1^d N(alpha_A r, t 1)
at the rates phi0 = beta_t(alpha_G C_r) / beta_0(C_r), phi1 = beta_t(alpha_G C_r) / beta_t(alpha_A C_r).
The (t, tau) grid is searched in floats and the best points are certified in mp.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from typing import Any, List, Optional, Tuple

import numpy as np
from mpmath import mp

from ..config.settings import settings
from ..errors import IndeterminateError, InfeasibleError, InputError
from ..numerics.bounded import BoundedValue, as_bounded, rational_below, to_fraction, working_precision
from ..records.models import BetaQuery, GadgetParams, GadgetVariant
from ..theta.rates import RateCurve, alpha_dagger, log_beta

logger = logging.getLogger(__name__)

CERTIFY_CANDIDATES = 5


def _rate_grid(p: float, alpha_A: float, alpha_G: float) -> List[Tuple[float, float, float, float]]:
    """(gap, t, tau, C_r) for every feasible grid point, best first."""
    t_points = settings.gadget.bdd_t_points
    taus = np.logspace(-3, 3, settings.gadget.bdd_tau_points)
    zero_curve = RateCurve(p, 0.0)
    found = []
    for i in range(t_points):
        t = 0.5 * i / (t_points - 1)
        curve = zero_curve if i == 0 else RateCurve(p, t)
        theta_vals, mu_vals = RateCurve._theta_mu(p, t, taus)
        with np.errstate(divide="ignore", invalid="ignore"):
            a_G = np.power(mu_vals, 1.0 / p)
            rate_G = taus * mu_vals + np.log(theta_vals)
            c_r = a_G / alpha_G
            rate_0 = zero_curve.log_beta_at(c_r)
            rate_A = curve.log_beta_at(alpha_A * c_r)
        ok = (c_r >= t) & (alpha_A * c_r > t) & np.isfinite(rate_0) & np.isfinite(rate_A) & np.isfinite(rate_G)
        gaps = rate_G - np.maximum(rate_0, rate_A)
        for j in np.nonzero(ok)[0]:
            found.append((float(gaps[j]), t, float(taus[j]), float(c_r[j])))
    found.sort(key=lambda row: -row[0])
    return found


def _certify(p: Fraction, t: Fraction, c_r: Fraction, alpha_A: Fraction, alpha_G: Fraction) -> Tuple[BoundedValue, BoundedValue]:
    rate_G = log_beta(BetaQuery(p=p, t=t, a=alpha_G * c_r))
    rate_0 = log_beta(BetaQuery(p=p, t=0, a=c_r))
    rate_A = log_beta(BetaQuery(p=p, t=t, a=alpha_A * c_r))
    return (rate_G - rate_0).exp(), (rate_G - rate_A).exp()


def bdd_gadget_params(p: Any, alpha_A: Any, alpha_G: Any, digits: Optional[int] = None) -> GadgetParams:
    """Shift and radius for the BDD gadget with phi0, phi1 > 1 certified."""
    return _bdd_gadget_params(to_fraction(p), to_fraction(alpha_A), to_fraction(alpha_G), digits)


@lru_cache(maxsize=64)
def _bdd_gadget_params(p: Fraction, alpha_A: Fraction, alpha_G: Fraction, digits: Optional[int]) -> GadgetParams:
    if p < 1:
        raise InputError(f"p must be >= 1, got {p}")
    if alpha_A >= alpha_G:
        raise InputError(f"need alpha_A < alpha_G, got {alpha_A} >= {alpha_G}")
    threshold = alpha_dagger(p)
    if not as_bounded(alpha_A).certainly_greater(threshold.upper):
        raise InfeasibleError(
            f"alpha_A = {alpha_A} is not above alpha_dagger({p}) = {mp.nstr(threshold.value, 8)}",
            kind="alpha-below-threshold",
        )

    grid = _rate_grid(float(p), float(alpha_A), float(alpha_G))
    best_gap = grid[0][0] if grid else float("-inf")
    logger.debug(f"BDD gadget grid: {len(grid)} feasible points, best float gap {best_gap:.6g}")

    with working_precision(digits):
        for gap, t_float, tau, c_float in grid[:CERTIFY_CANDIDATES]:
            if gap <= 0:
                break
            t = Fraction(round(t_float * 2 * (settings.gadget.bdd_t_points - 1)), 2 * (settings.gadget.bdd_t_points - 1))
            c_r = rational_below(c_float, 10**9)
            if c_r < t or alpha_A * c_r <= t:
                continue
            try:
                phi0, phi1 = _certify(p, t, c_r, alpha_A, alpha_G)
            except IndeterminateError as e:
                logger.debug(f"BDD gadget candidate t={t} undecided: {e}")
                continue
            if phi0.certainly_greater(1) and phi1.certainly_greater(1):
                logger.info(
                    f"BDD gadget p={p}: t={t}, C_r={float(c_r):.6g}, "
                    f"phi0={mp.nstr(phi0.value, 10)}, phi1={mp.nstr(phi1.value, 10)}"
                )
                c_r_b = BoundedValue.exact(c_r)
                return GadgetParams(
                    variant=GadgetVariant.BDD,
                    p=p,
                    t=t,
                    tau=to_fraction(tau),
                    phi0=phi0,
                    phi1=phi1,
                    C_r=c_r_b,
                    C_r_pth_power=c_r_b ** p,
                    alpha_A=alpha_A,
                    alpha_G=alpha_G,
                )

    raise InfeasibleError(
        f"no (t, tau) grid point gives phi0, phi1 > 1 (best log gap {best_gap:.6g})",
        kind="no-feasible-gadget",
        best_gap=best_gap,
    )
