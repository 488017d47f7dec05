"""Tests for exact lattices, enumeration and brute-force oracles."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from src.errors import BudgetExceededError, InputError
from src.lattice import (
    build_lattice,
    classify_maxlin,
    classify_promise_instance,
    contains,
    coordinates,
    count_points,
    dist_p,
    enumerate_points,
    gram_determinant,
    lambda1_p,
    lattice_from_columns,
    max_satisfiable,
    solve_maxlin_exact,
)
from src.records.models import (
    CvpInstance,
    MaxLinInstance,
    NormSpec,
    ProblemKind,
    PromiseClass,
    RationalMatrix,
    SvpInstance,
)
from src.reductions import maxlin_to_cvp, random_maxlin_instance

HALF = Fraction(1, 2)
L2 = NormSpec(p=2)


def _z(n: int):
    return build_lattice(RationalMatrix.identity(n))


def _naive_ball(lat, p: int, center, radius_pth):
    """Every lattice point of an integral lattice found by scanning a coordinate box."""
    reach = int(float(radius_pth) ** (1 / p)) + 1
    ranges = [range(int(np.floor(float(c))) - reach, int(np.ceil(float(c))) + reach + 1) for c in center]
    found = []
    for v in itertools.product(*ranges):
        if contains(lat, v) and sum(abs(Fraction(a) - c) ** p for a, c in zip(v, center)) <= radius_pth:
            found.append(tuple(Fraction(a) for a in v))
    return sorted(found)


class TestBasis:
    def test_checkerboard_canonical_form(self):
        lat = lattice_from_columns([[2, 0], [0, 2], [1, 1]])
        assert lat.rank == 2
        assert lat.basis.columns() == [(1, 1), (0, 2)]
        assert contains(lat, (3, 1))
        assert not contains(lat, (1, 0))

    def test_identity_is_canonical(self):
        assert _z(3).basis == RationalMatrix.identity(3)

    def test_maxlin_lattice_determinant_divides_power_of_two(self):
        inst = MaxLinInstance(matrix=((1, 0), (0, 1), (1, 1)), rhs=(1, 1, 0))
        lat = maxlin_to_cvp(inst, L2).lattice
        assert lat.rank == 3
        det = gram_determinant(lat)
        assert det.denominator == 1
        assert (2 ** (2 * inst.m)) % int(det) == 0

    def test_rational_generators(self):
        lat = lattice_from_columns([[HALF, 0], [0, Fraction(1, 3)]])
        assert coordinates(lat, (1, 1)) == (2, 3)
        assert coordinates(lat, (Fraction(1, 4), 0)) is None

    def test_rank_deficient_generators(self):
        lat = lattice_from_columns([[1, 2, 3], [2, 4, 6]])
        assert lat.rank == 1
        assert lat.dim == 3

    def test_zero_generators_rejected(self):
        with pytest.raises(InputError):
            lattice_from_columns([[0, 0]])

    def test_coordinates_length_checked(self):
        with pytest.raises(InputError):
            coordinates(_z(2), (1, 2, 3))


class TestEnumeration:
    def test_unit_interval(self):
        cloud = enumerate_points(_z(1), L2, [0], Fraction(9, 4))
        assert cloud.points == ((-1,), (0,), (1,))
        assert cloud.count == 3

    def test_square_corners(self):
        cloud = enumerate_points(_z(2), L2, [HALF, HALF], HALF)
        assert cloud.points == ((0, 0), (0, 1), (1, 0), (1, 1))

    def test_zero_radius_at_lattice_point(self):
        lat = lattice_from_columns([[1, 1], [1, -1]])
        assert enumerate_points(lat, L2, [1, 1], 0).points == ((1, 1),)

    @pytest.mark.parametrize("p", [1, 2, 3, 4])
    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_small_ball_is_origin_only(self, p, n):
        radius = Fraction(2, 5) ** p
        assert count_points(_z(n), NormSpec(p=p), [0] * n, radius) == 1

    def test_known_counts(self):
        assert count_points(_z(2), L2, [HALF, HALF], HALF) == 4
        assert count_points(_z(2), NormSpec(p=1), [0, 0], 1) == 5

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_matches_naive_box_scan(self, p):
        lat = lattice_from_columns([[1, 1, 0], [1, -1, 0], [0, 1, 1]])
        center = [HALF, 0, Fraction(1, 3)]
        radius = Fraction(3) ** p
        cloud = enumerate_points(lat, NormSpec(p=p), center, radius)
        assert list(cloud.points) == _naive_ball(lat, p, center, radius)

    def test_fractional_p_reports_bounded_counts(self):
        norm = NormSpec(p=Fraction(5, 2))
        cloud = enumerate_points(_z(2), norm, [0, 0], Fraction(3, 2))
        assert cloud.boundary == ()
        assert cloud.count == 5

    def test_rank_budget(self):
        with pytest.raises(BudgetExceededError):
            count_points(_z(13), L2, [0] * 13, 1)


class TestDistances:
    def test_target_in_lattice(self):
        lat = lattice_from_columns([[1, 1], [1, -1]])
        result = dist_p(lat, L2, (3, 1))
        assert result.distance_pth_power == 0
        assert result.witness == (3, 1)

    def test_square_center(self):
        result = dist_p(_z(2), L2, (HALF, HALF))
        assert result.distance_pth_power == HALF
        assert result.witness == (0, 0)

    def test_lambda1(self):
        assert lambda1_p(_z(4), NormSpec(p=3)).distance_pth_power == 1
        sheared = lattice_from_columns([[2, 0], [0, 1]])
        result = lambda1_p(sheared, L2)
        assert result.distance_pth_power == 1
        assert result.witness[0] == 0

    def test_lambda1_of_sparsified_square(self):
        from src.reductions import sparsify

        sub = sparsify(_z(2), 3, x=(1, 0))
        assert lambda1_p(sub, L2).distance_pth_power == 1

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_maxlin_distance_identity(self, p):
        rng = np.random.default_rng(11)
        for _ in range(30):
            inst = random_maxlin_instance(rng, int(rng.integers(1, 5)), int(rng.integers(1, 7)))
            cvp = maxlin_to_cvp(inst, NormSpec(p=p))
            dist = dist_p(cvp.lattice, cvp.norm, cvp.target).distance_pth_power
            assert dist == inst.m - solve_maxlin_exact(inst).satisfied


class TestMaxLinOracle:
    def test_worked_example(self):
        inst = MaxLinInstance(matrix=((1, 0), (0, 1), (1, 1)), rhs=(1, 1, 0))
        solution = solve_maxlin_exact(inst)
        assert solution.assignment == (1, 1)
        assert solution.satisfied == 3
        assert classify_maxlin(inst, solution) is PromiseClass.YES

    def test_contradictory_pair(self):
        inst = MaxLinInstance(matrix=((1,), (1,)), rhs=(0, 1))
        assert solve_maxlin_exact(inst).satisfied == 1

    def test_empty_system(self):
        assert max_satisfiable([], [], 3) == ((0, 0, 0), 0)

    def test_no_instance(self):
        # x1 = 0, x1 = 1 repeated: at most half satisfied
        inst = MaxLinInstance(matrix=((1,),) * 4, rhs=(0, 1, 0, 1))
        assert classify_maxlin(inst) is PromiseClass.NO

    def test_variable_budget(self):
        with pytest.raises(BudgetExceededError):
            max_satisfiable([[1] * 30], [1], 30)

    def test_first_maximiser_is_lexicographically_smallest(self):
        assignment, value = max_satisfiable([[1, 1]], [1], 2)
        assert (assignment, value) == ((0, 1), 1)


class TestPromiseClassification:
    def test_cvp_target_in_lattice_is_yes(self):
        lat = _z(2)
        cvp = CvpInstance(lattice=lat, target=(1, 2), radius_pth_power=Fraction(1, 10), gamma_pth_power=2, norm=L2)
        assert classify_promise_instance(ProblemKind.CVP, cvp) is PromiseClass.YES

    def test_svp_on_integers_is_no(self):
        svp = SvpInstance(
            lattice=_z(3), radius_pth_power=Fraction(1, 4), gamma_pth_power=Fraction(9, 4), norm=L2
        )
        assert classify_promise_instance(ProblemKind.SVP, svp) is PromiseClass.NO

    def test_gap_region_is_neither(self):
        svp = SvpInstance(lattice=_z(2), radius_pth_power=Fraction(1, 2), gamma_pth_power=4, norm=L2)
        assert classify_promise_instance(ProblemKind.SVP, svp) is PromiseClass.NEITHER

    def test_reduction_preserves_maxlin_class(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            inst = random_maxlin_instance(rng, 3, 6)
            expected = classify_maxlin(inst)
            if expected is PromiseClass.NEITHER:
                continue
            cvp = maxlin_to_cvp(inst, L2)
            assert classify_promise_instance(ProblemKind.CVP, cvp) is expected

    def test_kind_mismatch(self):
        svp = SvpInstance(lattice=_z(2), radius_pth_power=1, gamma_pth_power=1, norm=L2)
        with pytest.raises(InputError):
            classify_promise_instance(ProblemKind.CVP, svp)
