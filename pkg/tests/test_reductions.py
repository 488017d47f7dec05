"""Tests for the MAXLIN, SVP, BDD and sparsification reductions."""

from fractions import Fraction

import numpy as np
import pytest
from sympy import isprime

from src.errors import InfeasibleError, InputError
from src.gadgets import svp_gadget_params
from src.lattice import (
    build_lattice,
    contains,
    dist_p,
    gram_determinant,
    lattice_from_columns,
)
from src.numerics.bounded import as_bounded
from src.records.models import (
    CvpInstance,
    MaxLinInstance,
    NormSpec,
    PromiseClass,
    RationalMatrix,
)
from src.reductions import (
    bdd_counting_report,
    build_bdd_query,
    compute_svp_A_G,
    cvp_to_bdd_decide,
    cvp_to_counting_lattice,
    exact_cvp_oracle,
    lemma_counting_report,
    maxlin_to_cvp,
    maxlin_to_svp,
    prime_interval,
    sample_prime,
    sparsification_rates,
    sparsify,
    sparsify_with_target,
    svp_parameters,
)
from src.reductions.bdd import _radius_claim

HALF = Fraction(1, 2)
WORKED = MaxLinInstance(matrix=((1, 0), (0, 1), (1, 1)), rhs=(1, 1, 0))
# x1 = 0 and x1 = 1 twice each: at most half of the equations hold
HALF_SAT = MaxLinInstance(matrix=((1,),) * 4, rhs=(0, 1, 0, 1))


def _z(n: int, scale: int = 1):
    return build_lattice(RationalMatrix.identity(n, scale))


def _toy_cvp(target) -> CvpInstance:
    return CvpInstance(
        lattice=_z(2, 2),
        target=target,
        radius_pth_power=HALF,
        gamma_pth_power=Fraction(11, 10),
        norm=NormSpec(p=2),
    )


@pytest.fixture(scope="module")
def gadget_for():
    built = {}

    def build(p, sigma):
        if (p, sigma) not in built:
            built[(p, sigma)] = svp_gadget_params(p, sigma)
        return built[(p, sigma)]

    return build


class TestMaxLinToCvp:
    def test_worked_example(self):
        cvp = maxlin_to_cvp(WORKED, NormSpec(p=2))
        assert cvp.radius_pth_power == Fraction(9, 8)
        assert cvp.gamma_pth_power == Fraction(17, 15)
        assert cvp.target == (1, 1, 0)
        assert (cvp.lattice.dim, cvp.lattice.rank) == (3, 3)
        assert dist_p(cvp.lattice, cvp.norm, cvp.target).distance_pth_power == 0

    def test_every_even_vector_is_in_the_lattice(self):
        cvp = maxlin_to_cvp(HALF_SAT, NormSpec(p=1))
        for i in range(HALF_SAT.m):
            assert contains(cvp.lattice, [2 if j == i else 0 for j in range(HALF_SAT.m)])

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_distance_counts_violated_equations(self, p):
        cvp = maxlin_to_cvp(HALF_SAT, NormSpec(p=p))
        assert dist_p(cvp.lattice, cvp.norm, cvp.target).distance_pth_power == 2


class TestCountingLattice:
    def test_block_dimensions(self):
        cvp = maxlin_to_cvp(WORKED, NormSpec(p=3))
        lattice = cvp_to_counting_lattice(cvp, RationalMatrix.identity(2), [HALF, HALF])
        assert lattice.dim == 3 + 2 + 1
        assert lattice.rank == 6
        assert contains(lattice, [-1, -1, 0, -HALF, -HALF, 1])

    def test_target_must_be_half_a_lattice_vector(self):
        cvp = CvpInstance(
            lattice=_z(2, 4), target=(1, 0), radius_pth_power=1, gamma_pth_power=2, norm=NormSpec(p=2)
        )
        with pytest.raises(InputError) as info:
            cvp_to_counting_lattice(cvp, RationalMatrix.identity(1), [HALF])
        assert info.value.kind == "hypothesis-violated"

    def test_gadget_target_length(self):
        cvp = maxlin_to_cvp(WORKED, NormSpec(p=3))
        with pytest.raises(InputError):
            cvp_to_counting_lattice(cvp, RationalMatrix.identity(2), [HALF])

    @pytest.mark.parametrize("inst", [WORKED, HALF_SAT], ids=["yes", "no"])
    def test_block_counts_respect_bounds(self, inst):
        cvp = maxlin_to_cvp(inst, NormSpec(p=3))
        d = 2
        close = 1 + cvp.radius_pth_power + Fraction(d, 8)
        checks = lemma_counting_report(cvp, RationalMatrix.identity(d), [HALF] * d, close, 2 * close)
        assert [c.name for c in checks] == ["block-yes-lower", "block-no-upper"]
        assert all(c.holds for c in checks)
        assert any(c.applicable for c in checks)


class TestSvpParameters:
    @pytest.fixture(scope="class")
    def gadget(self):
        return svp_gadget_params(3, Fraction(17, 15))

    @pytest.mark.slow
    def test_radius_identity_is_exact(self, gadget):
        cvp = maxlin_to_cvp(WORKED, NormSpec(p=3))
        artifacts = compute_svp_A_G(cvp, gadget)
        claims = {c.name: c for c in artifacts.claims}
        assert claims["gadget-radius-identity"].holds
        assert claims["gadget-radius-identity"].exact
        assert artifacts.d % cvp.lattice.dim == 0
        assert artifacts.gamma_pth_power > 1
        assert artifacts.min_feasible_m is None or artifacts.min_feasible_m > cvp.lattice.dim

    @pytest.mark.slow
    def test_small_instances_fail_the_gap_claim(self, gadget):
        cvp = maxlin_to_cvp(WORKED, NormSpec(p=3))
        artifacts = compute_svp_A_G(cvp, gadget)
        assert not {c.name: c for c in artifacts.claims}["far-radius-after-cvp-gap"].holds
        with pytest.raises(InfeasibleError) as info:
            compute_svp_A_G(cvp, gadget, strict=True)
        assert info.value.kind == "claim-violated"

    @pytest.mark.slow
    def test_sixty_four_equations_fall_short(self, gadget, precision):
        sigma = Fraction(17, 15)
        artifacts = svp_parameters(3, 64, 24, sigma, gadget)
        assert {c.name: c.holds for c in artifacts.claims} == {
            "gadget-radius-identity": True,
            "far-radius-inside-gadget": True,
            "far-radius-after-cvp-gap": False,
        }
        assert not artifacts.gap_holds
        assert artifacts.d % 64 == 0
        # the third claim needs r'^p >= gamma^p / (delta c) with c <= (sqrt(sigma) - 1)^2 / 2
        spread = (float(sigma) ** 0.5 - 1) ** 2 / 2
        threshold = artifacts.min_feasible_m
        assert threshold is not None
        assert threshold > 8 / (3 * float(gadget.delta) * spread)

        at_threshold = svp_parameters(3, threshold, Fraction(3 * threshold, 8), sigma, gadget)
        assert all(c.holds for c in at_threshold.claims)
        assert at_threshold.gap_holds
        assert at_threshold.min_feasible_m == threshold

    @pytest.mark.slow
    def test_claims_hold_past_the_threshold(self, gadget_for, precision):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p = int(rng.choice([3, 4]))
            sigma = 1 + Fraction(8, 3) * Fraction(int(rng.integers(1, 5)), 20)
            params = gadget_for(p, sigma)
            threshold = svp_parameters(p, 8, 3, sigma, params).min_feasible_m
            assert threshold is not None
            m = threshold + int(rng.integers(0, threshold))
            artifacts = svp_parameters(p, m, Fraction(3 * m, 8), sigma, params)
            assert all(c.holds for c in artifacts.claims), (p, sigma, m)
            assert artifacts.gap_holds, (p, sigma, m)
            assert artifacts.min_feasible_m == threshold

    def test_gadget_must_match_instance(self, gadget):
        cvp = maxlin_to_cvp(WORKED, NormSpec(p=4))
        with pytest.raises(InputError):
            compute_svp_A_G(cvp, gadget)

    def test_svp_needs_p_above_two(self):
        with pytest.raises(InputError):
            maxlin_to_svp(WORKED, NormSpec(p=2))

    @pytest.mark.slow
    def test_toy_chain(self, gadget):
        svp, artifacts = maxlin_to_svp(WORKED, NormSpec(p=3), params=gadget, seed=3, toy=True)
        assert svp.toy and artifacts.toy
        assert artifacts.d == 4
        assert artifacts.q in (2, 3)
        assert svp.lattice.dim == 3 + 4 + 1
        assert svp.radius_pth_power == artifacts.radius_pth_power

    @pytest.mark.slow
    def test_dry_run_stops_before_sampling(self, gadget):
        svp, artifacts = maxlin_to_svp(WORKED, NormSpec(p=3), params=gadget, dry_run=True, toy=True)
        assert svp is None
        assert artifacts.q is None
        assert artifacts.prime_interval == (2, 3)


class TestPrimes:
    def test_prime_interval(self):
        log_100 = as_bounded(100).log()
        lo, hi = prime_interval(log_100, log_100)
        assert lo == 2
        assert 4200 <= hi <= 4201

    def test_prime_interval_budget(self):
        assert prime_interval(as_bounded(5000), as_bounded(5000)) is None

    def test_small_range(self):
        drawn = {sample_prime(10, 20, seed=s) for s in range(40)}
        assert drawn <= {11, 13, 17, 19}
        assert len(drawn) > 1
        assert sample_prime(10, 20, seed=5) == sample_prime(10, 20, seed=5)

    def test_wide_range(self):
        q = sample_prime(2 ** 70, 2 ** 71, seed=1)
        assert 2 ** 70 <= q <= 2 ** 71
        assert isprime(q)

    def test_empty_ranges(self):
        with pytest.raises(InfeasibleError):
            sample_prime(24, 28)
        with pytest.raises(InputError):
            sample_prime(1, 5)


class TestSparsify:
    def test_fixed_vector(self):
        sub = sparsify(_z(2), 3, x=(1, 0))
        assert sub.basis.columns() == [(3, 0), (0, 1)]

    @pytest.mark.parametrize("x", [(1, 1), (2, 5), (0, 4)])
    def test_index_is_q(self, x):
        lat = lattice_from_columns([[1, 1], [1, -1]])
        sub = sparsify(lat, 7, x=x)
        assert gram_determinant(sub) == 49 * gram_determinant(lat)

    def test_zero_vector_keeps_the_lattice(self):
        assert sparsify(_z(2), 5, x=(0, 5)) == _z(2)

    def test_rejects_composite_and_bad_length(self):
        with pytest.raises(InputError):
            sparsify(_z(2), 4, x=(1, 0))
        with pytest.raises(InputError):
            sparsify(_z(2), 3, x=(1, 0, 0))

    def test_seeded_sampling_is_deterministic(self):
        lat = _z(3)
        assert sparsify(lat, 11, seed=4) == sparsify(lat, 11, seed=4)

    def test_target_shift_stays_in_the_coset(self):
        lat = lattice_from_columns([[1, 1], [1, -1]])
        target = (HALF, 0)
        sub, shifted = sparsify_with_target(lat, target, 5, seed=2)
        assert contains(lat, [a - b for a, b in zip(target, shifted)])
        assert sub.rank == 2

    @pytest.mark.parametrize("q", [3, 5, 11])
    def test_rates_within_envelopes(self, q):
        checks = sparsification_rates(
            _z(2, 2), NormSpec(p=2), q, 20, trials=2000, seed=0, target=(1, 0)
        )
        assert [c.name for c in checks] == ["survival", "short-vector", "target-lost", "target-kept"]
        assert all(c.holds for c in checks)

    def test_survival_only_without_target(self):
        checks = sparsification_rates(_z(2, 2), NormSpec(p=2), 3, 20, trials=500, seed=1)
        assert [c.name for c in checks] == ["survival"]
        assert checks[0].observed == 1.0


class TestBdd:
    def test_needs_integral_instance(self):
        cvp = _toy_cvp((HALF, 0))
        with pytest.raises(InputError):
            build_bdd_query(cvp, 2, toy=True, dry_run=True)

    def test_radius_match_tolerance(self, precision):
        one = as_bounded(1)
        assert _radius_claim("close", as_bounded(1 + Fraction(1, 10 ** 35)), one).holds
        assert not _radius_claim("loose", as_bounded(1 + Fraction(1, 10 ** 25)), one).holds

    def test_counting_report_needs_integer_p(self):
        cvp = CvpInstance(
            lattice=_z(2, 2),
            target=(0, 0),
            radius_pth_power=HALF,
            gamma_pth_power=Fraction(11, 10),
            norm=NormSpec(p=Fraction(5, 2)),
        )
        with pytest.raises(InputError):
            bdd_counting_report(cvp, 2)

    @pytest.mark.slow
    def test_alpha_below_threshold(self):
        with pytest.raises(InfeasibleError) as info:
            build_bdd_query(_toy_cvp((0, 0)), HALF, toy=True, dry_run=True)
        assert info.value.kind == "alpha-below-threshold"

    @pytest.mark.slow
    def test_dry_run_radius_claims(self):
        query, radius_pth, artifacts = build_bdd_query(_toy_cvp((0, 0)), 2, toy=True, dry_run=True)
        assert query is None
        assert artifacts.q is None
        assert abs(float(radius_pth) - 1) < 1e-2
        assert [c.name for c in artifacts.claims] == ["short-radius-match", "yes-radius-match", "no-radius-match"]
        assert all(c.holds for c in artifacts.claims)
        assert all(float(c.margin) < 1e-30 for c in artifacts.claims)

    @pytest.mark.slow
    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("target", [(0, 0), (1, 1)], ids=["yes", "no"])
    def test_block_counts(self, target, d):
        checks = bdd_counting_report(_toy_cvp(target), 2, d=d)
        assert [c.name for c in checks] == ["block-short-upper", "block-yes-lower", "block-no-upper"]
        assert all(c.holds for c in checks)

    def test_gadget_dimension_must_be_positive(self):
        with pytest.raises(InputError):
            bdd_counting_report(_toy_cvp((0, 0)), 2, d=0)

    @pytest.mark.slow
    def test_toy_decisions(self):
        oracle = exact_cvp_oracle(NormSpec(p=2))
        no = [cvp_to_bdd_decide(_toy_cvp((1, 1)), 2, oracle, seed=s, toy=True) for s in range(50)]
        yes = [cvp_to_bdd_decide(_toy_cvp((0, 0)), 2, oracle, seed=s, toy=True) for s in range(50)]
        assert all(v is PromiseClass.NO for v in no)
        assert sum(v is PromiseClass.YES for v in yes) >= 45

    @pytest.mark.slow
    def test_query_is_watermarked(self):
        query, _, artifacts = build_bdd_query(_toy_cvp((0, 0)), 2, seed=1, toy=True)
        assert query.toy and artifacts.toy
        assert query.lattice.dim == 2 + artifacts.d
        assert artifacts.q in (2, 3)
