"""Reductions: MAXLIN to CVP, CVP to SVP, CVP to BDD, and sparsification"""
from .bdd import BddOracle, bdd_counting_report, build_bdd_query, cvp_to_bdd_decide, exact_cvp_oracle, promise_holds
from .maxlin import maxlin_to_cvp, random_maxlin_instance
from .sparsify import sample_prime, sparsification_rates, sparsify, sparsify_with_target
from .svp import (
    compute_svp_A_G,
    cvp_to_counting_lattice,
    lemma_counting_report,
    maxlin_to_svp,
    prime_interval,
    svp_parameters,
)

__all__ = [
    "BddOracle",
    "bdd_counting_report",
    "build_bdd_query",
    "compute_svp_A_G",
    "cvp_to_bdd_decide",
    "cvp_to_counting_lattice",
    "exact_cvp_oracle",
    "lemma_counting_report",
    "maxlin_to_cvp",
    "maxlin_to_svp",
    "prime_interval",
    "promise_holds",
    "random_maxlin_instance",
    "sample_prime",
    "sparsification_rates",
    "sparsify",
    "sparsify_with_target",
    "svp_parameters",
]
