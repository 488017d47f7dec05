"""Tests for error-tracked arithmetic."""

from fractions import Fraction

import pytest
from mpmath import mp, mpf

from src.errors import IndeterminateError, InputError
from src.numerics.bounded import (
    BoundedValue,
    Comparison,
    as_bounded,
    bounded_max,
    bounded_sum,
    decide,
    mpf_to_fraction,
    rational_above,
    rational_below,
    to_fraction,
)


class TestToFraction:
    @pytest.mark.parametrize(
        "raw, expected",
        [
            (3, Fraction(3)),
            ("9/8", Fraction(9, 8)),
            (" 0.05 ", Fraction(1, 20)),
            (0.1, Fraction(1, 10)),
            (Fraction(2, 7), Fraction(2, 7)),
        ],
    )
    def test_reads_exact_inputs(self, raw, expected):
        assert to_fraction(raw) == expected

    def test_rejects_booleans_and_nan(self):
        with pytest.raises(ValueError):
            to_fraction(True)
        with pytest.raises(ValueError):
            to_fraction(float("nan"))

    def test_mpf_to_fraction_is_exact(self, precision):
        x = mpf(1) / 3
        q = mpf_to_fraction(x)
        assert q.denominator & (q.denominator - 1) == 0
        assert abs(q - Fraction(1, 3)) < Fraction(1, 10**35)


class TestBoundedArithmetic:
    def test_exact_dyadic_has_no_error(self, precision):
        assert BoundedValue.exact(Fraction(3, 4)).abs_error == 0

    def test_inexact_rational_is_enclosed(self, precision):
        third = BoundedValue.exact(Fraction(1, 3))
        assert third.abs_error > 0
        assert mpf_to_fraction(third.lower) <= Fraction(1, 3) <= mpf_to_fraction(third.upper)

    def test_operations_enclose_true_value(self, precision):
        x = BoundedValue.exact(Fraction(1, 3))
        y = BoundedValue.exact(Fraction(2, 7))
        expected = Fraction(1, 3) * Fraction(2, 7) + Fraction(1, 3) / Fraction(2, 7) - 1
        result = x * y + x / y - 1
        assert mpf_to_fraction(result.lower) <= expected <= mpf_to_fraction(result.upper)

    def test_reflected_operators(self, precision):
        x = BoundedValue.exact(2)
        assert (1 - x).value == -1
        assert (3 * x).value == 6
        assert (1 / x).value == mpf("0.5")
        assert (5 + x).value == 7

    def test_exp_log_round_trip(self, precision):
        x = BoundedValue.exact(Fraction(5, 2))
        back = x.log().exp()
        assert abs(back.value - mpf("2.5")) < mpf(10) ** -35
        assert back.lower <= mpf("2.5") <= back.upper

    def test_log_of_possibly_nonpositive_raises(self, precision):
        straddle = BoundedValue(value=mpf("0.0"), abs_error=mpf("0.1"))
        with pytest.raises(IndeterminateError):
            straddle.log()

    def test_division_by_possible_zero_raises(self, precision):
        with pytest.raises(IndeterminateError):
            BoundedValue.exact(1) / BoundedValue(value=mpf(0), abs_error=mpf("1e-3"))

    def test_root_and_power(self, precision):
        x = BoundedValue.exact(8)
        assert abs(x.root(3).value - 2) < mpf(10) ** -35
        assert (BoundedValue.exact(2) ** 10).value == 1024
        assert abs((BoundedValue.exact(2) ** Fraction(1, 2)).value - mp.sqrt(2)) < mpf(10) ** -35

    def test_root_of_negative_raises(self, precision):
        with pytest.raises(InputError):
            BoundedValue.exact(-1).root(2)

    def test_sum_and_max(self, precision):
        values = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
        assert bounded_sum(values).value == mpf("0.875")
        assert bounded_max(values).value == mpf("0.5")
        with pytest.raises(InputError):
            bounded_max([])


class TestComparisons:
    def test_decided_comparisons(self, precision):
        a = as_bounded(Fraction(1, 3))
        b = as_bounded(Fraction(1, 2))
        assert a.compare(b) is Comparison.LESS
        assert b.compare(a) is Comparison.GREATER
        assert b.certainly_greater(a)
        assert b.margin_over(a) > 0

    def test_overlap_is_indeterminate(self, precision):
        a = BoundedValue(value=mpf(1), abs_error=mpf("0.1"))
        b = BoundedValue(value=mpf("1.05"), abs_error=mpf("0.1"))
        assert a.compare(b) is Comparison.INDETERMINATE
        assert a.margin_over(b) < 0
        with pytest.raises(IndeterminateError):
            decide(a.compare(b), "overlapping values")

    def test_log_scale_values_compare_against_linear(self, precision):
        big = as_bounded(1000).as_log_scale()
        assert big.log_scale
        assert big.certainly_greater(999)
        assert big.certainly_less(1001)

    def test_heuristic_flag_propagates(self, precision):
        h = as_bounded(2).as_heuristic()
        assert (h + 1).heuristic
        assert not (as_bounded(2) + 1).heuristic


class TestRationalRounding:
    def test_below_and_above_bracket(self, precision):
        x = as_bounded(Fraction(1, 3))
        lo, hi = rational_below(x), rational_above(x)
        assert lo <= Fraction(1, 3) <= hi
        assert hi - lo <= Fraction(2, 10**12)

    def test_custom_denominator(self, precision):
        assert rational_below(mp.pi, 100) == Fraction(314, 100)
        assert rational_above(mp.pi, 100) == Fraction(315, 100)

    def test_serialization_round_trip_keeps_enclosure(self, precision):
        x = as_bounded(Fraction(1, 3))
        again = BoundedValue.model_validate(x.model_dump(mode="json"))
        assert again.abs_error >= x.abs_error
        assert again.contains(x.value)
