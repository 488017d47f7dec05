"""Certified theta-lemma verification and numeric explorers"""
from .explorer import alpha_dagger_table, explore_conjecture
from .theta_lemma import (
    a_term,
    certify_interval,
    partial_sum,
    partial_sum_derivatives,
    verify_lemma_theta_half,
)

__all__ = [
    "a_term",
    "partial_sum",
    "partial_sum_derivatives",
    "certify_interval",
    "verify_lemma_theta_half",
    "explore_conjecture",
    "alpha_dagger_table",
]
