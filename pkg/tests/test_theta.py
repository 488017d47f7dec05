"""Tests for the theta series, count rates and count bounds."""

import warnings
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp, mpf

from src.errors import NoSolutionError
from src.lattice import build_lattice, count_points
from src.numerics.bounded import rational_below
from src.records.models import BetaQuery, NormSpec, RationalMatrix, ThetaParams
from src.theta import (
    alpha_dagger,
    beta,
    beta_inverse_zero,
    count_upper_bound,
    mu,
    mu_inverse_tau,
    sandwich_constant,
    theta,
    theta_second_derivative_at_zero,
    tightest_count_tau,
)
from src.theta.rates import RateCurve

HALF = Fraction(1, 2)


def _assert_bound_covers_counts(p, tau, t, n):
    lattice = build_lattice(RationalMatrix.identity(n))
    for r in (1, 2, 3):
        radius_pth = Fraction(r) ** p
        exact = count_points(lattice, NormSpec(p=p), [t] * n, radius_pth)
        assert count_upper_bound(p, tau, radius_pth, [t] * n).upper >= exact, (n, r)


class TestTheta:
    def test_dominant_term(self):
        value = theta(ThetaParams(p=3, tau=50, t=0))
        assert value.lower > 1
        assert value.upper < 1 + mpf("1e-20")

    def test_folding_symmetry(self):
        a = theta(ThetaParams(p=3, tau=1, t=Fraction(1, 4)))
        b = theta(ThetaParams(p=3, tau=1, t=Fraction(3, 4)))
        c = theta(ThetaParams(p=3, tau=1, t=Fraction(5, 4)))
        assert a.value == b.value == c.value

    def test_jacobi_value(self):
        with mp.workdps(90):
            tau = +mp.pi
            closed = mp.pi ** mpf(0.25) / mp.gamma(mpf(3) / 4)
            value = theta(ThetaParams(p=2, tau=tau, t=0))
            assert abs(value.value - closed) < mpf("1e-55")
        assert abs(value.value - mpf("1.086434811")) < mpf("1e-9")

    def test_p1_closed_form_matches_series(self):
        closed = theta(ThetaParams(p=1, tau=2, t=Fraction(1, 3)))
        direct = mp.nsum(lambda z: mp.exp(-2 * abs(z - mpf(1) / 3)), [-mp.inf, mp.inf])
        assert abs(closed.value - direct) < mpf("1e-12")

    def test_error_is_rigorous_against_direct_sum(self):
        value = theta(ThetaParams(p=Fraction(5, 2), tau=Fraction(3, 10), t=Fraction(1, 5)))
        with mp.workdps(80):
            direct = mp.fsum(mp.exp(-mpf(3) / 10 * abs(z - mpf(1) / 5) ** mpf(2.5)) for z in range(-200, 201))
        assert value.lower - mpf("1e-50") <= direct <= value.upper + mpf("1e-50")


class TestMu:
    def test_concentrates_at_zero(self):
        assert mu(ThetaParams(p=2, tau=100, t=0)).upper < mpf("1e-40")

    @pytest.mark.parametrize("p", [Fraction(2), Fraction(3), Fraction(5, 2)])
    def test_half_shift_support_bound(self, p):
        value = mu(ThetaParams(p=p, tau=2, t=HALF))
        assert value.upper >= 0.5 ** float(p)

    @pytest.mark.parametrize("t, target", [(0, Fraction(1, 2)), (HALF, Fraction(1)), (Fraction(1, 4), Fraction(2))])
    def test_inverse_round_trip(self, t, target):
        tau = mu_inverse_tau(2, t, target)
        back = mu(ThetaParams(p=2, tau=tau.value, t=t))
        assert abs(back.value - mpf(target.numerator) / target.denominator) < mpf("1e-20")

    def test_small_target_needs_large_tau(self):
        assert mu_inverse_tau(2, 0, Fraction(1, 10**6)).value > 10

    def test_unreachable_target(self):
        with pytest.raises(NoSolutionError):
            mu_inverse_tau(2, HALF, Fraction(1, 4))
        with pytest.raises(NoSolutionError):
            mu_inverse_tau(2, 0, 0)


class TestBeta:
    def test_below_shift_is_zero(self):
        assert beta(BetaQuery(p=2, t=HALF, a=Fraction(1, 4))).value == 0

    def test_half_corner(self):
        assert beta(BetaQuery(p=3, t=HALF, a=HALF)).value == 2

    def test_inverse_zero_round_trip(self):
        value = beta(BetaQuery(p=2, t=0, a=1))
        assert value.value > 1
        back = beta_inverse_zero(2, value)
        assert abs(back.value - 1) < mpf("1e-15")

    def test_inverse_zero_boundary(self):
        assert beta_inverse_zero(3, 1).value == 0
        with pytest.raises(NoSolutionError):
            beta_inverse_zero(3, HALF)

    def test_beta_grows_with_radius(self):
        small = beta(BetaQuery(p=3, t=0, a=Fraction(1, 2)))
        large = beta(BetaQuery(p=3, t=0, a=Fraction(3, 2)))
        assert large.certainly_greater(small)


class TestRateCurve:
    @pytest.mark.parametrize("p", [1.0, 3.0])
    def test_underflowed_weights_give_nan_without_warnings(self, p):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            theta_vals, mu_vals = RateCurve._theta_mu(p, 0.5, np.array([1.0, 1e8]))
            curve = RateCurve(p, 0.5)
        assert theta_vals[1] == 0
        assert np.isnan(mu_vals[1])
        assert np.isfinite(mu_vals[0])
        assert len(curve.a) > 0


@pytest.mark.slow
class TestAlphaDagger:
    @pytest.mark.parametrize("p", [1, 2])
    def test_equals_one_up_to_two(self, p):
        assert abs(alpha_dagger(p).value - 1) <= mpf("1e-3")

    def test_large_p_between_half_and_one(self):
        value = alpha_dagger(16).value
        assert mpf(0.5) < value < 1

    def test_strictly_decreasing(self):
        values = [alpha_dagger(p).value for p in (Fraction(5, 2), 3, 4, 8, 16)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_flagged_heuristic(self):
        assert alpha_dagger(3).heuristic


class TestCountBounds:
    def test_covers_unit_ball(self):
        assert count_upper_bound(2, 1, Fraction(9, 4), [0]).lower >= 3

    def test_monotone_in_radius(self):
        values = [count_upper_bound(3, 1, r, [HALF, 0]).value for r in (0, 1, 2, 5, 9)]
        assert values == sorted(values)

    def test_bounds_exact_count_at_tightest_tau(self):
        p, radius_pth = 3, Fraction(8)
        center = [HALF] * 4
        tau = tightest_count_tau(p, radius_pth, center)
        bound = count_upper_bound(p, tau.value, radius_pth, center)
        lattice = build_lattice(RationalMatrix.identity(4))
        assert bound.lower >= count_points(lattice, NormSpec(p=p), center, radius_pth)

    @pytest.mark.parametrize("p", [1, 2, 3])
    @pytest.mark.parametrize("tau", [HALF, 1, 2])
    @pytest.mark.parametrize("t", [0, HALF, Fraction(1, 4)])
    def test_never_below_enumeration(self, p, tau, t):
        for n in (1, 2, 3):
            _assert_bound_covers_counts(p, tau, t, n)

    @pytest.mark.slow
    @pytest.mark.parametrize("p", [1, 2, 3])
    @pytest.mark.parametrize("tau", [HALF, 1, 2])
    @pytest.mark.parametrize("t", [0, HALF, Fraction(1, 4)])
    def test_never_below_enumeration_in_higher_rank(self, p, tau, t):
        for n in (4, 5):
            _assert_bound_covers_counts(p, tau, t, n)

    def test_huge_bounds_switch_to_log_scale(self):
        bound = count_upper_bound(2, 1, 10**4, [0] * 1000)
        assert bound.log_scale

    def test_sandwich_constant_is_moderate(self):
        radius_pth = rational_below(2 * mu(ThetaParams(p=2, tau=1, t=0)))
        lattice = build_lattice(RationalMatrix.identity(2))
        count = count_points(lattice, NormSpec(p=2), [0, 0], radius_pth)
        c = sandwich_constant(2, 1, 0, 2, count)
        assert 0 < c.value <= 10

    @pytest.mark.slow
    @pytest.mark.parametrize("p", [1, 2, 3])
    @pytest.mark.parametrize("t", [0, HALF, Fraction(1, 4)])
    def test_sandwich_on_the_diagonal(self, p, t):
        for n in range(2, 7):
            radius_pth = rational_below(n * mu(ThetaParams(p=p, tau=1, t=t)))
            lattice = build_lattice(RationalMatrix.identity(n))
            count = count_points(lattice, NormSpec(p=p), [t] * n, radius_pth)
            c = sandwich_constant(p, 1, t, n, count)
            assert 0 < c.value <= 10, (p, t, n)


class TestSecondDerivative:
    def test_nonnegative_summands_above_threshold(self):
        value, nonnegative = theta_second_derivative_at_zero(3, 1)
        assert nonnegative
        assert value.lower > 0

    def test_flag_below_threshold(self):
        _, nonnegative = theta_second_derivative_at_zero(3, Fraction(1, 2))
        assert not nonnegative
