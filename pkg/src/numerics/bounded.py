"""
Error-tracked high-precision reals.

A BoundedValue is a midpoint plus a rigorous absolute error radius. Every
operation widens the radius by the propagated input error and a rounding
allowance of sixteen units in the last place at the working precision.
"""

import logging
import math
from contextlib import contextmanager
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Optional, Union

from mpmath import mp, mpf
from pydantic import BaseModel, ConfigDict, field_serializer, field_validator

from ..config.settings import settings
from ..errors import IndeterminateError, InputError

logger = logging.getLogger(__name__)


class Comparison(str, Enum):
    """Outcome of an error-aware comparison"""
    GREATER = "greater"
    LESS = "less"
    INDETERMINATE = "indeterminate"


@contextmanager
def working_precision(digits: Optional[int] = None) -> Iterator[int]:
    """Run a block at `digits` significant digits plus the configured guard digits."""
    digits = digits or settings.precision.digits
    with mp.workdps(digits + settings.precision.guard_digits):
        yield digits


def unit_roundoff() -> mpf:
    return mp.ldexp(mpf(1), -(mp.prec - 4))


def to_fraction(x: Any) -> Fraction:
    """Exact rational from int, Fraction, decimal string or float (as written)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x}")
        return Fraction(repr(x))
    raise ValueError(f"cannot read {type(x).__name__} as a rational")


def to_mpf(x: Any) -> mpf:
    """Nearest mpf at the current precision."""
    if isinstance(x, BoundedValue):
        return x.value
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, float):
        return mpf(repr(x))
    return mpf(x)


def mpf_to_fraction(x: mpf) -> Fraction:
    """Exact rational value of a binary mpf."""
    man, exp = mp.mpf(x).man_exp
    if exp >= 0:
        return Fraction(int(man) << int(exp))
    return Fraction(int(man), 1 << int(-exp))


def format_decimal(x: mpf, digits: Optional[int] = None) -> str:
    digits = digits or int(mp.prec * 0.30103) + 2
    return mp.nstr(x, digits, strip_zeros=True)


class BoundedValue(BaseModel):
    """Real number with a conservative absolute error bound"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    value: mpf
    abs_error: mpf = mpf(0)
    log_scale: bool = False  # value is the natural log of the represented quantity
    heuristic: bool = False  # error is an estimate, not a proof

    @field_validator("value", "abs_error", mode="before")
    @classmethod
    def coerce_mpf(cls, v: Any) -> mpf:
        if isinstance(v, str):
            v = mpf(v.strip())
        elif not isinstance(v, mpf):
            v = to_mpf(v)
        if mp.isnan(v):
            raise ValueError("NaN is not a bounded value")
        return v

    @field_validator("abs_error")
    @classmethod
    def check_error(cls, v: mpf) -> mpf:
        if v < 0:
            raise ValueError("abs_error must be non-negative")
        return v

    @field_serializer("value")
    def serialize_value(self, v: mpf) -> str:
        return format_decimal(v)

    @field_serializer("abs_error")
    def serialize_error(self, v: mpf) -> str:
        # rounded outward so a re-read never shrinks the radius
        return format_decimal(v * (1 + mpf(2) ** -40), 20)

    # ------------------------------------------------------------------ #

    @classmethod
    def exact(cls, x: Any) -> "BoundedValue":
        """Bounded view of an exact input; the conversion error is tracked."""
        if isinstance(x, BoundedValue):
            return x
        if isinstance(x, mpf):
            return cls.model_construct(value=x, abs_error=mpf(0), log_scale=False, heuristic=False)
        q = to_fraction(x)
        v = to_mpf(q)
        err = mpf(0) if mpf_to_fraction(v) == q else unit_roundoff() * abs(v)
        return cls.model_construct(value=v, abs_error=err, log_scale=False, heuristic=False)

    def _derive(self, value: mpf, error: mpf, *others: "BoundedValue") -> "BoundedValue":
        heuristic = self.heuristic or any(o.heuristic for o in others)
        log_scale = self.log_scale or any(o.log_scale for o in others)
        return BoundedValue.model_construct(
            value=value, abs_error=error, log_scale=log_scale, heuristic=heuristic
        )

    @property
    def lower(self) -> mpf:
        return self.value - self.abs_error

    @property
    def upper(self) -> mpf:
        return self.value + self.abs_error

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        tags = "".join([" log" if self.log_scale else "", " heuristic" if self.heuristic else ""])
        return f"BoundedValue({mp.nstr(self.value, 20)} ± {mp.nstr(self.abs_error, 3)}{tags})"

    # --- arithmetic ---------------------------------------------------- #

    def __add__(self, other: Any) -> "BoundedValue":
        o = as_bounded(other)
        v = self.value + o.value
        return self._derive(v, self.abs_error + o.abs_error + unit_roundoff() * abs(v), o)

    __radd__ = __add__

    def __neg__(self) -> "BoundedValue":
        return self._derive(-self.value, self.abs_error)

    def __sub__(self, other: Any) -> "BoundedValue":
        return self + (-as_bounded(other))

    def __rsub__(self, other: Any) -> "BoundedValue":
        return as_bounded(other) + (-self)

    def __mul__(self, other: Any) -> "BoundedValue":
        o = as_bounded(other)
        v = self.value * o.value
        err = (
            abs(self.value) * o.abs_error
            + abs(o.value) * self.abs_error
            + self.abs_error * o.abs_error
            + unit_roundoff() * abs(v)
        )
        return self._derive(v, err, o)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "BoundedValue":
        o = as_bounded(other)
        if abs(o.value) <= o.abs_error:
            raise IndeterminateError(f"division by {o!r}, which may be zero")
        v = self.value / o.value
        err = (self.abs_error + abs(v) * o.abs_error) / (abs(o.value) - o.abs_error)
        return self._derive(v, err + unit_roundoff() * abs(v), o)

    def __rtruediv__(self, other: Any) -> "BoundedValue":
        return as_bounded(other) / self

    def __abs__(self) -> "BoundedValue":
        return self._derive(abs(self.value), self.abs_error)

    def __pow__(self, exponent: Any) -> "BoundedValue":
        if isinstance(exponent, int) and not isinstance(exponent, bool):
            return self.power_int(exponent)
        e = as_bounded(exponent)
        if e.abs_error == 0 and mp.isint(e.value) and abs(e.value) < 2**31:
            return self.power_int(int(e.value))
        if self.value == 0 and self.abs_error == 0:
            return self._derive(mpf(0), mpf(0), e)
        return (self.log() * e).exp()

    # --- monotone functions -------------------------------------------- #

    def _monotone(self, fn: Callable[[mpf], mpf], lo: mpf, hi: mpf) -> "BoundedValue":
        v = fn(self.value)
        spread = mpf(0)
        if self.abs_error:
            spread = max(abs(fn(lo) - v), abs(fn(hi) - v))
        return self._derive(v, spread + 2 * unit_roundoff() * abs(v))

    def exp(self) -> "BoundedValue":
        out = self._monotone(mp.exp, self.lower, self.upper)
        return out.model_copy(update={"log_scale": False})

    def log(self) -> "BoundedValue":
        if self.lower <= 0:
            raise IndeterminateError(f"logarithm of {self!r}, which may be non-positive")
        return self._monotone(mp.log, self.lower, self.upper)

    def sqrt(self) -> "BoundedValue":
        if self.upper < 0:
            raise InputError(f"square root of negative value {self!r}")
        return self._monotone(mp.sqrt, max(self.lower, mpf(0)), self.upper)

    def power_int(self, k: int) -> "BoundedValue":
        if k == 0:
            return self._derive(mpf(1), mpf(0))
        if k < 0:
            return 1 / self.power_int(-k)
        v = self.value ** k
        if not self.abs_error:
            return self._derive(v, unit_roundoff() * k * abs(v))
        m = max(abs(self.lower), abs(self.upper))
        # |x^k - y^k| <= k max(|x|,|y|)^(k-1) |x - y|
        err = k * m ** (k - 1) * self.abs_error
        return self._derive(v, err + unit_roundoff() * k * abs(v))

    def root(self, p: Any) -> "BoundedValue":
        """Principal p-th root of a non-negative value."""
        if self.upper < 0:
            raise InputError(f"root of negative value {self!r}")
        if self.value == 0 and self.abs_error == 0:
            return self
        e = 1 / as_bounded(p)
        if self.lower <= 0:
            # bracket [0, upper^(1/p)] when the interval touches zero
            hi = (BoundedValue.exact(self.upper).log() * e).exp().upper
            return self._derive(hi / 2, hi / 2)
        return (self.log() * e).exp()

    # --- comparisons --------------------------------------------------- #

    def compare(self, other: Any) -> Comparison:
        a, b = _aligned(self, as_bounded(other))
        if a.lower > b.upper:
            return Comparison.GREATER
        if a.upper < b.lower:
            return Comparison.LESS
        return Comparison.INDETERMINATE

    def certainly_greater(self, other: Any) -> bool:
        return self.compare(other) is Comparison.GREATER

    def certainly_less(self, other: Any) -> bool:
        return self.compare(other) is Comparison.LESS

    def margin_over(self, other: Any) -> mpf:
        """Guaranteed gap self - other (negative when undecided)."""
        a, b = _aligned(self, as_bounded(other))
        return a.lower - b.upper

    def contains(self, x: Any) -> bool:
        y = as_bounded(x)
        return self.lower <= y.lower and y.upper <= self.upper

    def inflate(self, extra: Any) -> "BoundedValue":
        return self._derive(self.value, self.abs_error + abs(to_mpf(extra)))

    def as_heuristic(self) -> "BoundedValue":
        return self.model_copy(update={"heuristic": True})

    def as_log_scale(self) -> "BoundedValue":
        """Natural log of a positive linear value, flagged as log scale."""
        if self.log_scale:
            return self
        return self.log().model_copy(update={"log_scale": True})


def _aligned(a: BoundedValue, b: BoundedValue):
    if a.log_scale == b.log_scale:
        return a, b
    return a.as_log_scale(), b.as_log_scale()


def as_bounded(x: Any) -> BoundedValue:
    return x if isinstance(x, BoundedValue) else BoundedValue.exact(x)


def bounded_sum(values: Iterable[Any]) -> BoundedValue:
    total = BoundedValue.exact(0)
    for v in values:
        total = total + v
    return total


def bounded_max(values: Iterable[Any]) -> BoundedValue:
    """Enclosure of the maximum of several bounded values."""
    items = [as_bounded(v) for v in values]
    if not items:
        raise InputError("maximum of an empty collection")
    lo = max(v.lower for v in items)
    hi = max(v.upper for v in items)
    return items[0]._derive((lo + hi) / 2, (hi - lo) / 2, *items[1:])


def rational_below(x: Any, max_den: Optional[int] = None) -> Fraction:
    """Rational with denominator `max_den` that is at most the lower end of x."""
    max_den = max_den or settings.reduction.rational_den
    lo = mpf_to_fraction(as_bounded(x).lower)
    return Fraction(math.floor(lo * max_den), max_den)


def rational_above(x: Any, max_den: Optional[int] = None) -> Fraction:
    max_den = max_den or settings.reduction.rational_den
    hi = mpf_to_fraction(as_bounded(x).upper)
    return Fraction(math.ceil(hi * max_den), max_den)


def decide(comparison: Comparison, what: str) -> bool:
    """True/False for a decided comparison, IndeterminateError otherwise."""
    if comparison is Comparison.INDETERMINATE:
        raise IndeterminateError(f"cannot decide {what} at {mp.dps} digits")
    return comparison is Comparison.GREATER


Number = Union[int, Fraction, mpf, BoundedValue]
