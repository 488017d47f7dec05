"""
Lattice sparsification and prime sampling.

A random x in F_q^k keeps the lattice vectors B c with <c, x> = 0 mod q,
where c are the coordinates in the canonical basis. For x != 0 the result
has index q.
"""

import logging
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from sympy import isprime, primerange

from ..config.settings import settings
from ..errors import InfeasibleError, InputError
from ..lattice.basis import build_lattice, coordinates
from ..lattice.enumeration import enumerate_points, lambda1_p
from ..numerics.bounded import BoundedValue, as_bounded, to_fraction
from ..records.models import BoundCheck, LatticeDescription, NormSpec, RationalMatrix

logger = logging.getLogger(__name__)


def _uniform_below(rng: np.random.Generator, bound: int, size: int) -> List[int]:
    """Uniform integers in [0, bound), by rejection on random bytes so bound may exceed 64 bits."""
    if bound < 1:
        raise InputError(f"empty sampling range [0, {bound})")
    bits = max(1, (bound - 1).bit_length())
    nbytes = (bits + 7) // 8
    shift = 8 * nbytes - bits
    out: List[int] = []
    while len(out) < size:
        v = int.from_bytes(rng.bytes(nbytes), "big") >> shift
        if v < bound:
            out.append(v)
    return out


def _check_prime(q: int) -> None:
    if q < 2 or not isprime(q):
        raise InputError(f"sparsification modulus {q} is not prime")


def _sublattice(lat: LatticeDescription, q: int, x: Sequence[int]) -> LatticeDescription:
    """Basis of {B c : <c, x> = 0 mod q}."""
    k = lat.rank
    x = [int(v) % q for v in x]
    if not any(x):
        return lat
    i = next(j for j, v in enumerate(x) if v)
    inverse = pow(x[i], -1, q)
    coefficient_columns = []
    for j in range(k):
        col = [0] * k
        if j == i:
            col[i] = q
        else:
            col[j] = 1
            col[i] = -((x[j] * inverse) % q)
        coefficient_columns.append(col)
    columns = [lat.basis.apply(col) for col in coefficient_columns]
    return build_lattice(RationalMatrix.from_columns([list(c) for c in columns], dim=lat.dim))


def sparsify(
    lat: LatticeDescription, q: int, x: Optional[Sequence[int]] = None, seed: Optional[int] = None
) -> LatticeDescription:
    """Random index-q sublattice; x is sampled uniformly from F_q^rank when not given."""
    _check_prime(q)
    if x is None:
        x = _uniform_below(np.random.default_rng(seed), q, lat.rank)
    elif len(x) != lat.rank:
        raise InputError(f"sparsification vector has length {len(x)}, lattice rank is {lat.rank}")
    sub = _sublattice(lat, q, x)
    logger.debug(f"Sparsified rank {lat.rank} lattice mod {q} with x={list(x)[:8]}")
    return sub


def sparsify_with_target(
    lat: LatticeDescription,
    target: Sequence[Any],
    q: int,
    seed: Optional[int] = None,
    x: Optional[Sequence[int]] = None,
    z: Optional[Sequence[int]] = None,
) -> Tuple[LatticeDescription, Tuple[Fraction, ...]]:
    """Sparsify and shift the target by -B z for z uniform in F_q^rank."""
    _check_prime(q)
    if len(target) != lat.dim:
        raise InputError("target dimension differs from the lattice dimension")
    rng = np.random.default_rng(seed)
    if x is None:
        x = _uniform_below(rng, q, lat.rank)
    if z is None:
        z = _uniform_below(rng, q, lat.rank)
    shift = lat.basis.apply(tuple(z))
    shifted = tuple(to_fraction(t) - s for t, s in zip(target, shift))
    return sparsify(lat, q, x=x), shifted


def sample_prime(lo: int, hi: int, seed: Optional[int] = None) -> int:
    """
    Prime from [lo, hi], deterministic under seed. Narrow ranges are scanned
    and one prime is drawn uniformly; wide ranges draw odd candidates until
    one passes sympy's primality test (exact below 2^64, BPSW above).
    """
    lo, hi = int(lo), int(hi)
    if lo < 2 or hi < lo:
        raise InputError(f"prime range [{lo}, {hi}] is empty or below 2")
    rng = np.random.default_rng(seed)
    width = hi - lo + 1
    if width <= settings.reduction.prime_scan_width:
        primes = list(primerange(lo, hi + 1))
        if not primes:
            raise InfeasibleError(f"no prime in [{lo}, {hi}]", kind="no-prime-found")
        return primes[_uniform_below(rng, len(primes), 1)[0]]

    for attempt in range(settings.reduction.prime_attempts):
        candidate = (lo + _uniform_below(rng, width, 1)[0]) | 1
        if candidate <= hi and isprime(candidate):
            logger.debug(f"Prime of {candidate.bit_length()} bits after {attempt + 1} candidates")
            return candidate
    raise InfeasibleError(
        f"no prime found in [{lo}, {hi}] after {settings.reduction.prime_attempts} candidates",
        kind="no-prime-found",
    )


# ============================================================================
# Monte Carlo checks of the sparsification bounds
# ============================================================================

def _primitive_coefficients(lat: LatticeDescription, points: Sequence[Sequence[Fraction]]) -> np.ndarray:
    """One coefficient vector per line through the origin."""
    seen = {}
    for v in points:
        c = coordinates(lat, v)
        if c is None or not any(c):
            continue
        g = np.gcd.reduce(np.abs(np.array(c, dtype=np.int64)))
        direction = tuple(int(a) // int(g) for a in c)
        lead = next(a for a in direction if a)
        if lead < 0:
            direction = tuple(-a for a in direction)
        seen.setdefault(direction, c)
    return np.array(list(seen.values()), dtype=np.int64).reshape(-1, lat.rank)


def _coefficients(lat: LatticeDescription, points: Sequence[Sequence[Fraction]], skip_zero: bool) -> np.ndarray:
    rows = [coordinates(lat, v) for v in points]
    rows = [c for c in rows if c is not None and (any(c) or not skip_zero)]
    return np.array(rows, dtype=np.int64).reshape(-1, lat.rank)


def _scaled_at_most(value: Any, factor: Fraction, p: Fraction, bound: Any, strict: bool = False) -> bool:
    """value <= (factor^p) * bound, exact when possible and conservative otherwise."""
    if p.denominator == 1 and isinstance(value, Fraction) and isinstance(bound, Fraction):
        rhs = factor ** int(p) * bound
        return value < rhs if strict else value <= rhs
    rhs = (as_bounded(factor) ** p) * as_bounded(bound)
    return as_bounded(value).certainly_less(rhs)


def _check(name: str, rate: float, low: float, high: float, trials: int, applicable: bool, detail: str) -> BoundCheck:
    sigma = np.sqrt(max(rate * (1 - rate), 1.0 / trials) / trials)
    slack = settings.verifier.sigma_widening * sigma
    holds = (low - slack <= rate <= high + slack) if applicable else True
    bound = high if high < 1 else low
    return BoundCheck(
        name=name, observed=float(rate), bound=float(bound), holds=bool(holds), applicable=applicable, detail=detail
    )


def sparsification_rates(
    lat: LatticeDescription,
    norm: NormSpec,
    q: int,
    radius_pth_power: Any,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    target: Optional[Sequence[Any]] = None,
) -> List[BoundCheck]:
    """
    Empirical survival rates against the sparsification bounds.

    Survival of a set S of pairwise independent short vectors is compared with
    [1 - q/|S|, |S|/q]. With a target, the three shifted-target bounds
    P[lambda1 <= r] <= N(r, 0)/q, P[dist > r] <= q/N(r, t) + q^-n and
    P[dist <= r] <= N(r, t)/q + q^-n are checked too. Every observed rate is
    allowed `sigma_widening` binomial standard deviations of slack.
    """
    _check_prime(q)
    trials = trials or settings.verifier.sparsification_trials
    rng = np.random.default_rng(seed)
    p = norm.p
    k = lat.rank
    radius = radius_pth_power if isinstance(radius_pth_power, BoundedValue) else to_fraction(radius_pth_power)
    lam = lambda1_p(lat, norm).distance_pth_power

    ball = enumerate_points(lat, norm, [0] * lat.dim, radius).points
    independent = _primitive_coefficients(lat, ball)
    nonzero = _coefficients(lat, ball, skip_zero=True)
    xs = rng.integers(0, q, size=(trials, k), dtype=np.int64)

    checks: List[BoundCheck] = []
    n_independent = len(independent)
    if n_independent:
        hits = ((independent @ xs.T) % q == 0).any(axis=0)
        rate = float(hits.mean())
        applicable = _scaled_at_most(radius, Fraction(q), p, lam, strict=True)
        checks.append(
            _check(
                "survival",
                rate,
                max(0.0, 1 - q / n_independent),
                min(1.0, n_independent / q),
                trials,
                applicable,
                f"|S|={n_independent}, q={q}",
            )
        )

    if target is None:
        return checks

    n_ball = len(ball)
    short_hits = ((nonzero @ xs.T) % q == 0).any(axis=0) if len(nonzero) else np.zeros(trials, dtype=bool)
    checks.append(
        _check(
            "short-vector",
            float(short_hits.mean()),
            0.0,
            min(1.0, n_ball / q),
            trials,
            _scaled_at_most(radius, Fraction(q), p, lam),
            f"N(r,0)={n_ball}",
        )
    )

    around = enumerate_points(lat, norm, target, radius).points
    close = _coefficients(lat, around, skip_zero=False)
    zs = rng.integers(0, q, size=(trials, k), dtype=np.int64)
    offset = (zs * xs).sum(axis=1)
    n_close = len(close)
    if n_close:
        found = (((close @ xs.T) - offset[None, :]) % q == 0).any(axis=0)
    else:
        found = np.zeros(trials, dtype=bool)
    floor = float(q) ** (-k)
    checks.append(
        _check(
            "target-lost",
            float(1 - found.mean()),
            0.0,
            min(1.0, (q / n_close if n_close else 1.0) + floor),
            trials,
            _scaled_at_most(radius, Fraction(q, 2), p, lam, strict=True),
            f"N(r,t)={n_close}",
        )
    )
    checks.append(
        _check(
            "target-kept",
            float(found.mean()),
            0.0,
            min(1.0, n_close / q + floor),
            trials,
            True,
            f"N(r,t)={n_close}",
        )
    )
    for c in checks:
        logger.debug(f"sparsification {c.name}: observed {c.observed:.4f} vs {c.bound:.4f}, holds={c.holds}")
    return checks
