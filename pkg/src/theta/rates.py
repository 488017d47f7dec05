"""
Exponential point-count rates.

beta(p, t, a) is the growth rate of N(Z^n, a n^{1/p}, t 1_n) in n, and
alpha_dagger(p) is the infimum of a / beta_inverse_zero(beta(p, t, a))
over t in [0, 1/2], a >= t.
"""

import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Any, Optional, Tuple

import numpy as np
from mpmath import mp, mpf

from ..config.settings import settings
from ..errors import InputError, NoSolutionError
from ..numerics.bounded import BoundedValue, as_bounded, to_fraction, working_precision
from ..records.models import BetaQuery, ThetaParams
from .series import bisect_decreasing, mu_inverse_tau, theta_mu

logger = logging.getLogger(__name__)


def _rate_at(p: Any, t: Any, a_pth: BoundedValue, tau: BoundedValue) -> BoundedValue:
    """tau a^p + log theta(tau, t), widened over the tau bracket."""
    th, m = theta_mu(ThetaParams(p=p, tau=tau.value, t=t))
    rate = tau.value * a_pth + th.log()
    if tau.abs_error:
        # the derivative in tau is a^p - mu, and mu is monotone on the bracket
        _, m_lo = theta_mu(ThetaParams(p=p, tau=tau.lower, t=t))
        _, m_hi = theta_mu(ThetaParams(p=p, tau=tau.upper, t=t))
        slope = max(
            abs(a_pth.value - m_lo.value) + a_pth.abs_error + m_lo.abs_error,
            abs(a_pth.value - m_hi.value) + a_pth.abs_error + m_hi.abs_error,
        )
        rate = rate.inflate(slope * tau.abs_error)
    return rate


def log_beta(query: BetaQuery, digits: Optional[int] = None) -> BoundedValue:
    """Natural log of beta; raises for a < t, where beta is zero."""
    with working_precision(digits):
        p, t, a = query.p, query.t, query.a
        if a < t:
            raise NoSolutionError(f"beta vanishes for a={a} < t={t}")
        if a == t:
            return BoundedValue.exact(2 if t == Fraction(1, 2) else 1).log()
        a_pth = as_bounded(a) ** p
        tau = mu_inverse_tau(p, t, a_pth)
        return _rate_at(p, t, a_pth, tau)


def beta(query: BetaQuery, digits: Optional[int] = None) -> BoundedValue:
    """beta(p, t, a) = exp(tau* a^p) theta(tau*, t) where mu(tau*, t) = a^p."""
    with working_precision(digits):
        if query.a < query.t:
            return BoundedValue.exact(0)
        if query.a == query.t:
            return BoundedValue.exact(2 if query.t == Fraction(1, 2) else 1)
        return log_beta(query).exp()


def beta_inverse_zero(p: Any, value: Any, digits: Optional[int] = None) -> BoundedValue:
    """The a >= 0 with beta(p, 0, a) = value."""
    with working_precision(digits):
        target = as_bounded(value)
        if target.certainly_less(1):
            raise NoSolutionError(f"beta(p, 0, a) >= 1 for every a >= 0, got {mp.nstr(target.value, 12)}")
        if target.abs_error == 0 and target.value == 1:
            return BoundedValue.exact(0)
        log_target = target.log()

        def rate(tau: mpf) -> BoundedValue:
            th, m = theta_mu(ThetaParams(p=p, tau=tau, t=0))
            return tau * m + th.log()

        lo, hi = bisect_decreasing(rate, log_target, "beta_inverse_zero")
        # a = mu^{1/p} decreases in tau
        _, m_hi = theta_mu(ThetaParams(p=p, tau=hi, t=0))
        _, m_lo = theta_mu(ThetaParams(p=p, tau=lo, t=0))
        a_small = m_hi.root(p).lower
        a_large = m_lo.root(p).upper
        return BoundedValue(value=(a_small + a_large) / 2, abs_error=(a_large - a_small) / 2)


# ============================================================================
# alpha_dagger: float grid search with mp confirmation
# ============================================================================

class RateCurve:
    """
    Float table of (a(tau), log beta(tau)) for one shift t.

    a(tau) = mu(tau, t)^{1/p} decreases in tau, so the table is an implicit
    parametrisation of a -> log beta(p, t, a).
    """

    TAU_GRID = np.logspace(-12, 8, 480)
    Z_MAX = 400

    def __init__(self, p: float, t: float):
        self.p = p
        self.t = t
        theta_vals, mu_vals = self._theta_mu(p, t, self.TAU_GRID)
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.power(mu_vals, 1.0 / p)
            log_beta = self.TAU_GRID * mu_vals + np.log(theta_vals)
        ok = np.isfinite(a) & np.isfinite(log_beta) & (a > t)
        order = np.argsort(a[ok], kind="stable")
        a, log_beta = a[ok][order], log_beta[ok][order]
        # keep a strictly increasing subsequence so both interpolations are valid
        if len(log_beta):
            running = np.maximum.accumulate(log_beta)
            keep = np.concatenate([[True], log_beta[1:] > running[:-1]])
            keep &= np.concatenate([[True], np.diff(a) > 0])
            a, log_beta = a[keep], log_beta[keep]
        self.a = a
        self.log_beta = log_beta

    @staticmethod
    def _masked_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
        """num / den, NaN where the weights underflowed to zero"""
        return np.divide(num, den, out=np.full_like(num, np.nan), where=den > 0)

    @classmethod
    def _theta_mu(cls, p: float, t: float, taus: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if p == 1.0:
            q = np.exp(-taus)
            near, far = np.exp(-taus * t), np.exp(-taus * (1 - t))
            mass = near + far
            mu_vals = cls._masked_ratio(t * near + (1 - t) * far, mass) + q / (1 - q)
            return mass / (1 - q), mu_vals

        z = np.arange(-cls.Z_MAX, cls.Z_MAX + 1, dtype=float)
        dist = np.abs(z - t) ** p
        weights = np.exp(-np.outer(taus, dist))
        theta_vals = weights.sum(axis=1)
        mu_vals = cls._masked_ratio((weights * dist).sum(axis=1), theta_vals)

        # too flat for the truncated sum: use the integral approximation
        flat = taus * (cls.Z_MAX ** p) < 40
        theta_vals[flat] = 2 * math.gamma(1 + 1 / p) * taus[flat] ** (-1 / p)
        mu_vals[flat] = 1 / (p * taus[flat])
        return theta_vals, mu_vals

    def log_beta_at(self, a: np.ndarray) -> np.ndarray:
        """log beta for a inside the tabulated range, NaN outside"""
        out = np.interp(a, self.a, self.log_beta, left=np.nan, right=np.nan)
        return out

    def a_at(self, log_beta: np.ndarray) -> np.ndarray:
        """Inverse map; log beta is increasing in a"""
        return np.interp(log_beta, self.log_beta, self.a, left=np.nan, right=np.nan)


def _ratio_grid(p: float, zero_curve: RateCurve, ts: np.ndarray, offsets: np.ndarray) -> Tuple[float, float, float]:
    """Minimum of a / beta_inverse_zero(beta(t, a)) over t in ts and a = t + offsets."""
    best = (math.inf, 0.0, 0.0)
    for t in ts:
        t = float(min(max(t, 0.0), 0.5))
        a = t + offsets[offsets > 0]
        if t == 0.0:
            ratio = np.ones_like(a)
        else:
            curve = RateCurve(p, t)
            lb = curve.log_beta_at(a)
            with np.errstate(invalid="ignore", divide="ignore"):
                ratio = a / zero_curve.a_at(lb)
        ratio = np.where(np.isfinite(ratio), ratio, np.inf)
        k = int(np.argmin(ratio))
        if ratio[k] < best[0]:
            best = (float(ratio[k]), t, float(a[k]))
    return best


@lru_cache(maxsize=64)
def _alpha_dagger(p: Fraction) -> BoundedValue:
    pf = float(p)
    zero_curve = RateCurve(pf, 0.0)

    ts = np.linspace(0.0, 0.5, 200)
    offsets = np.logspace(-6, math.log10(20), 400)
    best = _ratio_grid(pf, zero_curve, ts, offsets)

    # beta(1/2, 1/2) = 2 is attained only at the corner
    corner_a0 = zero_curve.a_at(np.array([math.log(2.0)]))[0]
    if np.isfinite(corner_a0) and 0.5 / corner_a0 < best[0]:
        best = (0.5 / corner_a0, 0.5, 0.5)

    history = [best[0]]
    t_span, a_span = 0.5 / 199, 0.05 + best[2] - best[1]
    for _ in range(3):
        _, t_best, a_best = best
        ts = np.linspace(t_best - t_span, t_best + t_span, 21)
        a_lo = max(a_best - a_span, t_best + 1e-9)
        offsets_abs = np.linspace(a_lo, a_best + a_span, 41)
        for t in ts:
            t = float(min(max(t, 0.0), 0.5))
            candidate = _ratio_grid(pf, zero_curve, np.array([t]), offsets_abs - t)
            if candidate[0] < best[0]:
                best = candidate
        history.append(best[0])
        t_span /= 10
        a_span /= 10
    logger.debug(f"alpha_dagger({p}) float search: {history}")

    ratio_float, t_best, a_best = best
    spread = abs(history[-1] - history[-2]) + 1e-6
    if ratio_float >= 1.0:
        return BoundedValue(value=1, abs_error=spread, heuristic=True)

    with working_precision(settings.verifier.explorer_digits):
        t_q = to_fraction(t_best)
        a_q = to_fraction(a_best)
        if a_q == t_q and t_q == Fraction(1, 2):
            a0 = beta_inverse_zero(p, 2)
        else:
            a0 = beta_inverse_zero(p, beta(BetaQuery(p=p, t=t_q, a=a_q)))
        ratio = as_bounded(a_q) / a0
    if ratio.value >= 1:
        return BoundedValue(value=1, abs_error=spread, heuristic=True)
    return ratio.inflate(spread).as_heuristic()


def alpha_dagger(p: Any) -> BoundedValue:
    """BDD threshold from a grid search with refinement; error is an estimate, flagged heuristic."""
    p = to_fraction(float(p)) if isinstance(p, mpf) else to_fraction(p)
    if p < 1:
        raise InputError(f"alpha_dagger needs p >= 1, got {p}")
    return _alpha_dagger(p)
