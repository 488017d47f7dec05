"""
Theta upper bounds on integer point counts.

N(Z^n, r, t) <= exp(tau r^p) prod_i theta(p, tau, t_i) for every tau > 0.
"""

import logging
from collections import Counter
from typing import Any, Optional, Sequence

from mpmath import mp, mpf

from ..errors import InputError, NoSolutionError
from ..numerics.bounded import BoundedValue, as_bounded, bounded_sum, working_precision
from ..records.models import ThetaParams, fold_shift
from .series import bisect_decreasing, theta_mu

logger = logging.getLogger(__name__)

# counts beyond 10^300 are reported as natural logs
LOG_SCALE_THRESHOLD = mp.log(mpf(10) ** 300)


def _shift_classes(t_vec: Sequence[Any]) -> Counter:
    return Counter(fold_shift(as_key(t)) for t in t_vec)


def as_key(t: Any) -> Any:
    return t.value if isinstance(t, BoundedValue) else t


def log_count_upper_bound(p: Any, tau: Any, radius_pth_power: Any, t_vec: Sequence[Any]) -> BoundedValue:
    """log of exp(tau r^p) prod theta(p, tau, t_i)"""
    if as_bounded(radius_pth_power).upper < 0:
        raise InputError("radius must be non-negative")
    total = as_bounded(tau) * as_bounded(radius_pth_power)
    for t, k in _shift_classes(t_vec).items():
        th, _ = theta_mu(ThetaParams(p=p, tau=as_key(tau), t=t))
        total = total + k * th.log()
    return total


def count_upper_bound(
    p: Any, tau: Any, radius_pth_power: Any, t_vec: Sequence[Any], digits: Optional[int] = None
) -> BoundedValue:
    """
    Upper bound on the number of integer points within distance r of t_vec.
    The radius is passed as its p-th power. Results past 10^300 come back
    with log_scale set.
    """
    with working_precision(digits):
        log_bound = log_count_upper_bound(p, tau, radius_pth_power, t_vec)
        if log_bound.upper > LOG_SCALE_THRESHOLD:
            logger.debug(f"count bound exceeds 1e300, returning log {mp.nstr(log_bound.value, 10)}")
            return log_bound.model_copy(update={"log_scale": True})
        return log_bound.exp()


def tightest_count_tau(p: Any, radius_pth_power: Any, t_vec: Sequence[Any], digits: Optional[int] = None) -> BoundedValue:
    """tau minimising the count bound: the root of sum_i mu(p, tau, t_i) = r^p"""
    with working_precision(digits):
        classes = _shift_classes(t_vec)
        if not classes:
            raise InputError("empty shift vector")
        goal = as_bounded(radius_pth_power)
        floor = bounded_sum(k * (as_bounded(t) ** p if t != 0 else 0) for t, k in classes.items())
        if not goal.certainly_greater(floor):
            raise NoSolutionError("radius does not exceed the large-tau limit of the moment sum")

        def moment_sum(tau: mpf) -> BoundedValue:
            return bounded_sum(k * theta_mu(ThetaParams(p=p, tau=tau, t=t))[1] for t, k in classes.items())

        lo, hi = bisect_decreasing(moment_sum, goal, "tightest_count_tau")
        return BoundedValue(value=(lo + hi) / 2, abs_error=(hi - lo) / 2)


def sandwich_constant(p: Any, tau: Any, t: Any, n: int, count: int, digits: Optional[int] = None) -> BoundedValue:
    """
    Smallest C with count >= exp(n tau mu - C sqrt(n)) theta^n at r^p = n mu(p, tau, t);
    the matching upper side exp(n tau mu) theta^n always holds.
    """
    if n < 1 or count < 1:
        raise InputError("need n >= 1 and a positive count")
    with working_precision(digits):
        th, m = theta_mu(ThetaParams(p=p, tau=tau, t=t))
        exponent = n * (as_bounded(tau) * m + th.log())
        return (exponent - BoundedValue.exact(count).log()) / BoundedValue.exact(n).sqrt()
