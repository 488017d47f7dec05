"""
Depth-first enumeration over the triangular basis.

Level k fixes the k-th coefficient; once fixed, every coordinate up to the
next pivot row is final, so its contribution to ||v - center||_p^p can be
accumulated and used to prune. Integer p with rational data compares exact
rationals; otherwise norms are bounded values and undecidable points are
reported separately.
"""

import logging
from enum import Enum
from fractions import Fraction
from math import ceil, floor
from typing import Any, Callable, List, Optional, Sequence, Tuple

from mpmath import mp, mpf

from ..config.settings import settings
from ..errors import BudgetExceededError, IndeterminateError, InputError
from ..numerics.bounded import BoundedValue, as_bounded, to_fraction, to_mpf, working_precision
from ..records.models import DistanceResult, LatticeDescription, NormSpec, PointCloud

logger = logging.getLogger(__name__)


class Side(str, Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


class _Metric:
    """p-th power distances, exact when possible."""

    def __init__(self, norm: NormSpec, radius_pth_power: Any):
        self.p = norm.p
        self.exact = norm.exact_mode and not isinstance(radius_pth_power, (BoundedValue, mpf))
        if self.exact:
            self.p_int = int(self.p)
            self.radius = to_fraction(radius_pth_power)
        else:
            self.radius = as_bounded(radius_pth_power)
        self.zero = Fraction(0) if self.exact else BoundedValue.exact(0)

    def term(self, x: Fraction) -> Any:
        x = abs(x)
        if self.exact:
            return x ** self.p_int
        if x == 0:
            return BoundedValue.exact(0)
        return as_bounded(x) ** self.p

    def side(self, acc: Any, radius: Any = None) -> Side:
        radius = self.radius if radius is None else radius
        if self.exact:
            return Side.INSIDE if acc <= radius else Side.OUTSIDE
        acc, radius = as_bounded(acc), as_bounded(radius)
        if acc.upper <= radius.lower:
            return Side.INSIDE
        if acc.lower > radius.upper:
            return Side.OUTSIDE
        return Side.BOUNDARY

    def reach(self, remaining: Any) -> mpf:
        """Upper bound on the coordinate offset allowed by the remaining budget."""
        rem = to_mpf(remaining) if self.exact else as_bounded(remaining).upper
        if rem <= 0:
            return mpf(0)
        return mp.power(rem, 1 / to_mpf(self.p)) * (1 + mpf(2) ** -30)

    def remaining(self, acc: Any, radius: Any) -> Any:
        if self.exact:
            return radius - acc
        return as_bounded(radius).upper - as_bounded(acc).lower

    def value(self, acc: Any) -> Any:
        return acc


class _Walker:
    """Branch over basis coefficients within a p-th power budget."""

    def __init__(self, lat: LatticeDescription, metric: _Metric, center: Sequence[Any]):
        if lat.rank > settings.budget.max_rank:
            raise BudgetExceededError(
                f"enumeration rank {lat.rank} exceeds the budget of {settings.budget.max_rank}", rank=lat.rank
            )
        if len(center) != lat.dim:
            raise InputError(f"center has length {len(center)}, lattice dimension is {lat.dim}")
        self.lat = lat
        self.metric = metric
        self.center = [to_fraction(c) for c in center]
        self.columns = lat.basis.columns()
        self.pivots = list(lat.pivot_rows)
        self.segments = [
            range(r, self.pivots[k + 1] if k + 1 < lat.rank else lat.dim) for k, r in enumerate(self.pivots)
        ]
        self.visited = 0

    def _initial(self) -> Any:
        # rows above the first pivot are zero for every lattice vector
        acc = self.metric.zero
        first = self.pivots[0] if self.pivots else self.lat.dim
        for i in range(first):
            acc = acc + self.metric.term(self.center[i])
        return acc

    def walk(self, radius: Callable[[], Any], on_leaf: Callable[[List[Fraction], List[int], Any], None]) -> None:
        """Visit every lattice vector whose distance stays within radius()."""
        with working_precision():
            acc = self._initial()
            if self.metric.side(acc, radius()) is Side.OUTSIDE:
                return
            self._visit(0, [Fraction(0)] * self.lat.dim, [], acc, radius, on_leaf)

    def _visit(self, k, v, coeffs, acc, radius, on_leaf) -> None:
        self.visited += 1
        if self.visited > 20 * settings.budget.max_points:
            raise BudgetExceededError("enumeration visited too many nodes", nodes=self.visited)
        if k == self.lat.rank:
            on_leaf(v, coeffs, acc)
            return
        col = self.columns[k]
        row = self.pivots[k]
        piv = col[row]
        budget = radius()
        reach = self.metric.reach(self.metric.remaining(acc, budget))
        offset = to_mpf(self.center[row] - v[row])
        lo = int(mp.floor((offset - reach) / to_mpf(piv))) - 1
        hi = int(mp.ceil((offset + reach) / to_mpf(piv))) + 1
        for ck in range(lo, hi + 1):
            w = list(v)
            for i in range(row, self.lat.dim):
                if col[i]:
                    w[i] = v[i] + ck * col[i]
            seg = acc
            for i in self.segments[k]:
                seg = seg + self.metric.term(w[i] - self.center[i])
            if self.metric.side(seg, radius()) is Side.OUTSIDE:
                continue
            self._visit(k + 1, w, coeffs + [ck], seg, radius, on_leaf)


def enumerate_points(
    lat: LatticeDescription, norm: NormSpec, center: Sequence[Any], radius_pth_power: Any
) -> PointCloud:
    """All lattice points within the ball, sorted; undecidable points go to `boundary`."""
    metric = _Metric(norm, radius_pth_power)
    walker = _Walker(lat, metric, center)
    inside: List[Tuple[Fraction, ...]] = []
    boundary: List[Tuple[Fraction, ...]] = []

    def keep(v, coeffs, acc):
        side = metric.side(acc)
        if side is Side.INSIDE:
            inside.append(tuple(v))
            if len(inside) > settings.budget.max_points:
                raise BudgetExceededError(
                    f"more than {settings.budget.max_points} points in the ball", points=len(inside)
                )
        elif side is Side.BOUNDARY:
            boundary.append(tuple(v))

    walker.walk(lambda: metric.radius, keep)
    logger.debug(f"enumerate_points: {len(inside)} inside, {len(boundary)} boundary, {walker.visited} nodes")
    return PointCloud(
        points=tuple(sorted(inside)),
        center=tuple(walker.center),
        radius_pth_power=metric.radius,
        boundary=tuple(sorted(boundary)),
    )


def count_points(lat: LatticeDescription, norm: NormSpec, center: Sequence[Any], radius_pth_power: Any) -> int:
    """Number of lattice points in the ball, without materialising them."""
    metric = _Metric(norm, radius_pth_power)
    walker = _Walker(lat, metric, center)
    tally = {"inside": 0, "boundary": 0}

    def keep(v, coeffs, acc):
        side = metric.side(acc)
        if side is Side.INSIDE:
            tally["inside"] += 1
            if tally["inside"] > settings.budget.max_points:
                raise BudgetExceededError(f"more than {settings.budget.max_points} points in the ball")
        elif side is Side.BOUNDARY:
            tally["boundary"] += 1

    walker.walk(lambda: metric.radius, keep)
    if tally["boundary"]:
        raise IndeterminateError(
            f"{tally['boundary']} points lie on the boundary at {mp.dps} digits",
            kind="indeterminate-boundary",
            boundary=tally["boundary"],
        )
    return tally["inside"]


def _greedy_vector(lat: LatticeDescription, target: Sequence[Fraction]) -> List[Fraction]:
    """Round coefficients level by level along the triangular basis."""
    v = [Fraction(0)] * lat.dim
    columns = lat.basis.columns()
    for k, row in enumerate(lat.pivot_rows):
        col = columns[k]
        ck = round((target[row] - v[row]) / col[row])
        if ck:
            v = [a + ck * b for a, b in zip(v, col)]
    return v


def _norm_pth(metric: _Metric, v: Sequence[Fraction], center: Sequence[Fraction]) -> Any:
    acc = metric.zero
    for a, c in zip(v, center):
        acc = acc + metric.term(a - c)
    return acc


def _less(metric: _Metric, a: Any, b: Any) -> bool:
    if metric.exact:
        return a < b
    return as_bounded(a).value < as_bounded(b).value


def _closest(lat: LatticeDescription, norm: NormSpec, center: Sequence[Any], start: Any, exclude_zero: bool):
    metric = _Metric(norm, start)
    walker = _Walker(lat, metric, center)
    best = {"dist": start, "v": None, "coeffs": None}

    def improve(v, coeffs, acc):
        if exclude_zero and not any(v):
            return
        if best["v"] is None or _less(metric, acc, best["dist"]):
            best.update(dist=acc, v=tuple(v), coeffs=tuple(coeffs))
        elif not _less(metric, best["dist"], acc) and tuple(v) < best["v"]:
            best.update(dist=acc, v=tuple(v), coeffs=tuple(coeffs))

    def bound():
        d = best["dist"]
        return d if metric.exact else as_bounded(d).inflate(as_bounded(d).abs_error)

    walker.walk(bound, improve)
    return best


def dist_p(lat: LatticeDescription, norm: NormSpec, target: Sequence[Any]) -> DistanceResult:
    """p-th power distance from target to the lattice, with the lexicographically smallest witness."""
    center = [to_fraction(x) for x in target]
    with working_precision():
        metric = _Metric(norm, Fraction(0))
        start = _norm_pth(metric, _greedy_vector(lat, center), center)
    best = _closest(lat, norm, center, start, exclude_zero=False)
    if best["v"] is None:
        raise IndeterminateError("closest vector search lost its initial bound")
    return DistanceResult(distance_pth_power=best["dist"], witness=best["v"], coefficients=best["coeffs"])


def lambda1_p(lat: LatticeDescription, norm: NormSpec) -> DistanceResult:
    """Shortest nonzero vector length (p-th power) with its witness."""
    zero = [Fraction(0)] * lat.dim
    with working_precision():
        metric = _Metric(norm, Fraction(0))
        lengths = [_norm_pth(metric, col, zero) for col in lat.basis.columns()]
    start = lengths[0]
    for length in lengths[1:]:
        if _less(metric, length, start):
            start = length
    best = _closest(lat, norm, zero, start, exclude_zero=True)
    return DistanceResult(distance_pth_power=best["dist"], witness=best["v"], coefficients=best["coeffs"])
