"""
Gadget shift search.

For p >= 2 + 1e-7 the shift t = 1/2 works whenever theta(tau, 1/2) beats
theta(tau, 0). Below that, t = k / 2^z where theta(tau, 1/2^z) > theta(tau, 0)
and k is the maximiser of the residue table with the highest 2-adic valuation.
"""

import logging
import math
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple, TypeVar

import numpy as np
from mpmath import mp

from ..config.settings import settings
from ..errors import BudgetExceededError, IndeterminateError, InfeasibleError, InputError, NumericAssertionError
from ..numerics.bounded import BoundedValue, Comparison, bounded_max, to_fraction
from ..records.models import ThetaParams, ValuationWitness
from ..theta.series import theta, theta_second_derivative_at_zero

logger = logging.getLogger(__name__)

T = TypeVar("T")

HALF = Fraction(1, 2)
DIRECT_SHIFT_FROM = Fraction(2) + Fraction(1, 10**7)

# (lowest p, tau) for which theta(tau, 1/2) > theta(tau, 0) has a certified proof
REGIME_TAUS: List[Tuple[Fraction, Fraction]] = [
    (Fraction(22, 10), Fraction(1949, 1000)),
    (Fraction(2001, 1000), Fraction(89, 100)),
    (DIRECT_SHIFT_FROM, Fraction(162665, 10**6)),
]

FLOAT_UNIT = 2.0 ** -50


def nu2(k: int) -> int:
    """2-adic valuation of a nonzero integer."""
    if k == 0:
        raise InputError("the 2-adic valuation of 0 is infinite")
    return (k & -k).bit_length() - 1


def regime_tau(p: Fraction) -> Optional[Fraction]:
    for lowest, tau in REGIME_TAUS:
        if p >= lowest:
            return tau
    return None


def with_escalation(fn: Callable[[int], T], what: str) -> T:
    """Retry fn(digits) at doubled precision while it reports an undecided comparison."""
    digits = settings.precision.digits
    while True:
        try:
            return fn(digits)
        except NumericAssertionError:
            raise
        except IndeterminateError:
            if digits >= settings.precision.max_digits:
                raise IndeterminateError(f"{what} is undecided at {digits} digits")
            digits = min(2 * digits, settings.precision.max_digits)
            logger.debug(f"{what}: escalating to {digits} digits")


def _compare_shifts(p: Any, tau: Any, t_a: Any, t_b: Any) -> Comparison:
    def attempt(digits: int) -> Comparison:
        a = theta(ThetaParams(p=p, tau=tau, t=t_a), digits)
        b = theta(ThetaParams(p=p, tau=tau, t=t_b), digits)
        c = a.compare(b)
        if c is Comparison.INDETERMINATE:
            raise IndeterminateError(f"theta at t={t_a} vs t={t_b}")
        return c

    return with_escalation(attempt, f"theta({p}, {tau}, {t_a}) vs theta(., {t_b})")


# ============================================================================
# Residue tables
# ============================================================================

def float_residue_table(p: float, tau: float, z: int, reps: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Float theta values at t = reps / 2^z with an error bound that covers
    rounding and truncation. reps are canonical, in [0, 2^(z-1)].
    """
    radius = int(math.ceil((45.0 / tau) ** (1.0 / p))) + 1
    zs = np.arange(-radius, radius + 1, dtype=float)
    tail = 2 * math.exp(-tau * (radius + 0.5) ** p) / -math.expm1(-tau)
    values = np.empty(len(reps))
    errors = np.empty(len(reps))
    for start in range(0, len(reps), 4096):
        ts = reps[start:start + 4096] / float(2 ** z)
        dist = np.abs(zs[None, :] - ts[:, None])
        powered = dist ** p
        weights = np.exp(-tau * powered)
        with np.errstate(divide="ignore"):
            logs = np.where(dist > 0, np.abs(p * np.log(np.where(dist > 0, dist, 1.0))), 0.0)
        vals = weights.sum(axis=1)
        errs = FLOAT_UNIT * (weights * (4 + tau * powered * (logs + 4 * p + 4))).sum(axis=1)
        values[start:start + len(ts)] = vals
        errors[start:start + len(ts)] = errs + len(zs) * FLOAT_UNIT * vals + tail
    return values, errors


def _prefilter(p: Any, tau: Any, z: int, reps: np.ndarray) -> np.ndarray:
    """Residues that the float table cannot rule out as maximisers."""
    if z > settings.gadget.max_table_exponent:
        raise BudgetExceededError(
            f"residue table of size 2^{z} exceeds 2^{settings.gadget.max_table_exponent}", z=z
        )
    values, errors = float_residue_table(float(p), float(tau), z, reps.astype(float))
    floor = np.max(values - errors)
    slack = settings.gadget.tie_tolerance * np.max(values)
    return reps[values + errors >= floor - slack]


def bounded_residue_max(p: Any, tau: Any, z: int, reps: Iterable[int], digits: Optional[int] = None) -> BoundedValue:
    """Enclosure of max theta(tau, r / 2^z) over the canonical residues `reps`."""
    reps = np.array(sorted(set(int(r) for r in reps)), dtype=np.int64)
    candidates = _prefilter(p, tau, z, reps)
    logger.debug(f"residue max over {len(reps)} classes: {len(candidates)} left after float filter")
    values = [theta(ThetaParams(p=p, tau=tau, t=Fraction(int(r), 2 ** z)), digits) for r in candidates]
    return bounded_max(values)


def canonical_residue(r: int, z: int) -> int:
    r %= 2 ** z
    return min(r, 2 ** z - r)


def residue_order(p: Any, tau: Any, z: int, reps: Iterable[int]) -> List[int]:
    """Canonical residues sorted by float theta value, largest first."""
    reps = np.array(sorted(set(int(r) for r in reps)), dtype=np.int64)
    values, _ = float_residue_table(float(p), float(tau), z, reps.astype(float))
    order = np.argsort(-values, kind="stable")
    return [int(r) for r in reps[order]]


def _maximizers(p: Any, tau: Any, z: int) -> Tuple[List[int], Dict[int, BoundedValue]]:
    """Canonical maximisers of theta(tau, l / 2^z), decided in high precision."""
    reps = np.arange(0, 2 ** (z - 1) + 1, dtype=np.int64)
    candidates = [int(r) for r in _prefilter(p, tau, z, reps)]

    def attempt(digits: int) -> Tuple[List[int], Dict[int, BoundedValue]]:
        values = {r: theta(ThetaParams(p=p, tau=tau, t=Fraction(r, 2 ** z)), digits) for r in candidates}
        best_lower = max(v.lower for v in values.values())
        tied = sorted(r for r, v in values.items() if v.upper >= best_lower)
        if len(tied) > 1:
            raise IndeterminateError(f"residues {tied[:6]} tie at 2^{z}")
        return tied, values

    return with_escalation(attempt, f"maximiser of the 2^{z} residue table")


def _dyadic_shift(p: Fraction, tau: Fraction) -> Optional[Tuple[Fraction, ValuationWitness]]:
    second, nonnegative = theta_second_derivative_at_zero(p, tau)
    logger.debug(
        f"theta'' at 0 (p={p}, tau={tau}) = {mp.nstr(second.value, 8)}, summands nonnegative: {nonnegative}"
    )
    for z in range(1, settings.gadget.z_cap + 1):
        if _compare_shifts(p, tau, Fraction(1, 2 ** z), 0) is not Comparison.GREATER:
            continue
        logger.info(f"theta({p}, {tau}, 1/2^{z}) > theta({p}, {tau}, 0); building the 2^{z} residue table")
        tied, _ = _maximizers(p, tau, z)
        canonical = tied[0]
        maximizer_set = tuple(sorted({canonical, (2 ** z - canonical) % 2 ** z}))
        # highest valuation, then the smallest residue; both members share nu2
        k = min(maximizer_set, key=lambda r: (-nu2(r), r))
        witness = ValuationWitness(
            z=z, maximizer_set=maximizer_set, chosen_k=k, nu2_of_k=nu2(k), tau=tau
        )
        return Fraction(k, 2 ** z), witness
    return None


def find_gadget_shift(p: Any) -> Tuple[Fraction, ValuationWitness]:
    """
    Shift t for the integer gadget. Tries the configured tau (default 1) first,
    then the certified regime tau (t = 1/2 route) or tau = 1 - 1/p (dyadic route).
    """
    p = to_fraction(p)
    if p <= 2:
        raise InputError(f"integer gadgets need p > 2, got {p}")
    first = to_fraction(settings.gadget.svp_tau)
    if first <= 0:
        raise InputError(f"gadget tau must be positive, got {first}")

    if p >= DIRECT_SHIFT_FROM:
        taus = [first]
        fallback = regime_tau(p)
        if fallback is not None and fallback != first:
            taus.append(fallback)
        for tau in taus:
            if _compare_shifts(p, tau, HALF, 0) is Comparison.GREATER:
                logger.info(f"Gadget shift t = 1/2 at p = {p}, tau = {tau}")
                witness = ValuationWitness(z=1, maximizer_set=(1,), chosen_k=1, nu2_of_k=0, tau=tau)
                verify_shift(p, HALF, witness)
                return HALF, witness
        raise IndeterminateError(f"theta(tau, 1/2) > theta(tau, 0) not confirmed at p = {p}")

    for tau in (first, 1 - 1 / p):
        found = _dyadic_shift(p, tau)
        if found is not None:
            t, witness = found
            logger.info(f"Gadget shift t = {t} (z={witness.z}, k={witness.chosen_k}) at p = {p}, tau = {tau}")
            verify_shift(p, t, witness)
            return t, witness
        logger.info(f"No dyadic shift with z <= {settings.gadget.z_cap} at tau = {tau}")
    raise InfeasibleError(
        f"no z <= {settings.gadget.z_cap} with theta(tau, 1/2^z) > theta(tau, 0) at p = {p}", kind="not-found"
    )


def verify_shift(p: Any, t: Fraction, witness: ValuationWitness) -> None:
    """
    theta(t) > theta(l0 t mod 1) for every even l0 and >= for every l1,
    over the residues mod 2^z. Raises when either fails.
    """
    z, k = witness.z, witness.chosen_k
    tau = witness.tau if witness.tau is not None else Fraction(1)
    modulus = 2 ** z
    evens = {canonical_residue(l0 * k, z) for l0 in range(0, modulus, 2)}
    everything = {canonical_residue(l1 * k, z) for l1 in range(modulus)}

    def attempt(digits: int) -> None:
        at_t = theta(ThetaParams(p=p, tau=tau, t=t), digits)
        even_max = bounded_residue_max(p, tau, z, evens, digits)
        c = at_t.compare(even_max)
        if c is Comparison.INDETERMINATE:
            raise IndeterminateError("even-residue check undecided")
        if c is Comparison.LESS:
            raise NumericAssertionError(f"theta({t}) does not beat every even multiple of the shift")
        if at_t.certainly_less(bounded_residue_max(p, tau, z, everything, digits)):
            raise NumericAssertionError(f"theta({t}) is below another residue")

    with_escalation(attempt, f"residue inequalities for t = {t}")
