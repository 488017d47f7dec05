"""Tests for gadget shifts and gadget constants."""

from fractions import Fraction

import numpy as np
import pytest

from src.config.settings import settings
from src.errors import BudgetExceededError, InfeasibleError, InputError, NumericAssertionError
from src.gadgets import (
    bdd_gadget_params,
    count_ratio_trend,
    find_gadget_shift,
    nu2,
    svp_gadget_params,
    verify_gadget_counts,
    verify_shift,
)
from src.records.models import GadgetVariant, ValuationWitness

HALF = Fraction(1, 2)
SIGMA = 1 + Fraction(8, 3) * Fraction(1, 20)


@pytest.fixture(scope="module")
def p3_gadget():
    return svp_gadget_params(3, SIGMA)


class TestValuation:
    @pytest.mark.parametrize("k, expected", [(1, 0), (2, 1), (12, 2), (-8, 3), (96, 5)])
    def test_nu2(self, k, expected):
        assert nu2(k) == expected

    def test_zero_has_no_valuation(self):
        with pytest.raises(InputError):
            nu2(0)


class TestShiftSearch:
    @pytest.mark.parametrize("p", [Fraction(11, 5), Fraction(3), Fraction(4)])
    def test_half_shift_above_two(self, p):
        t, witness = find_gadget_shift(p)
        assert t == HALF
        assert (witness.z, witness.chosen_k, witness.nu2_of_k) == (1, 1, 0)
        assert witness.tau == 1

    @pytest.mark.parametrize("p", [2, Fraction(3, 2), 1])
    def test_rejects_p_up_to_two(self, p):
        with pytest.raises(InputError):
            find_gadget_shift(p)

    def test_configured_tau_is_tried_first(self, monkeypatch):
        monkeypatch.setattr(settings.gadget, "svp_tau", 2.0)
        t, witness = find_gadget_shift(3)
        assert t == HALF
        assert witness.tau == 2

    def test_nonpositive_tau_rejected(self, monkeypatch):
        monkeypatch.setattr(settings.gadget, "svp_tau", 0.0)
        with pytest.raises(InputError):
            find_gadget_shift(3)

    def test_wrong_shift_fails_verification(self):
        # theta(1, 1/4) < theta(1, 1/2) at p = 3
        witness = ValuationWitness(z=2, maximizer_set=(1,), chosen_k=1, nu2_of_k=0, tau=1)
        with pytest.raises(NumericAssertionError):
            verify_shift(3, Fraction(1, 4), witness)

    @pytest.mark.slow
    def test_dyadic_shift_near_two(self):
        p = 2 + Fraction(1, 2 * 10**7)
        t, witness = find_gadget_shift(p)
        assert t == Fraction(witness.chosen_k, 2 ** witness.z)
        assert witness.chosen_k in witness.maximizer_set
        assert witness.nu2_of_k == nu2(witness.chosen_k)
        assert 0 < t < HALF
        verify_shift(p, t, witness)


class TestSvpGadget:
    def test_constants_above_one(self, p3_gadget):
        assert p3_gadget.variant is GadgetVariant.SVP
        assert p3_gadget.t == HALF
        assert p3_gadget.rho.lower > 1
        assert p3_gadget.phi0.lower > 1
        assert p3_gadget.phi1.lower > 1
        assert 0 < p3_gadget.delta < HALF
        assert p3_gadget.sigma == SIGMA

    def test_radius_consistency(self, p3_gadget, precision):
        ratio = p3_gadget.C_r_pth_power / (p3_gadget.mu / (1 - p3_gadget.delta))
        assert abs(ratio.value - 1) < 1e-30
        assert abs((p3_gadget.C_r ** 3).value - p3_gadget.C_r_pth_power.value) < 1e-30

    def test_parameter_checks(self):
        with pytest.raises(InputError):
            svp_gadget_params(2, SIGMA)
        with pytest.raises(InputError):
            svp_gadget_params(3, 1)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_enumerated_counts_respect_bounds(self, p3_gadget, d):
        report = verify_gadget_counts(p3_gadget, d)
        assert report.all_bounds_hold
        assert report.rows[0].label == "close"
        assert report.residues_checked <= report.residues_total
        assert "close_over_even_max" in report.ratios

    def test_count_dimension_budget(self, p3_gadget):
        with pytest.raises(BudgetExceededError):
            verify_gadget_counts(p3_gadget, 11)
        with pytest.raises(BudgetExceededError):
            verify_gadget_counts(p3_gadget, 0)

    def test_ratio_trend(self, p3_gadget):
        frame, slope = count_ratio_trend(p3_gadget, [1, 2, 3])
        assert list(frame["d"]) == [1, 2, 3]
        assert frame["all_bounds_hold"].all()
        assert np.isfinite(slope)


class TestBddGadget:
    def test_alpha_order_checked(self):
        with pytest.raises(InputError):
            bdd_gadget_params(2, Fraction(3, 2), Fraction(3, 2))
        with pytest.raises(InputError):
            bdd_gadget_params(2, Fraction(2), Fraction(3, 2))

    @pytest.mark.slow
    def test_feasible_at_p2(self):
        params = bdd_gadget_params(2, Fraction(13, 10), Fraction(3, 2))
        assert params.variant is GadgetVariant.BDD
        assert params.phi0.lower > 1
        assert params.phi1.lower > 1
        assert 0 <= params.t <= HALF
        assert float(params.alpha_A) * float(params.C_r.lower) > float(params.t)

    @pytest.mark.slow
    def test_below_threshold(self):
        with pytest.raises(InfeasibleError) as info:
            bdd_gadget_params(2, Fraction(9, 10), Fraction(19, 20))
        assert info.value.kind == "alpha-below-threshold"
