"""Theta series, count rates and count bounds"""
from .counting import count_upper_bound, log_count_upper_bound, sandwich_constant, tightest_count_tau
from .rates import RateCurve, alpha_dagger, beta, beta_inverse_zero, log_beta
from .series import bisect_decreasing, mu, mu_inverse_tau, theta, theta_mu, theta_second_derivative_at_zero

__all__ = [
    "theta",
    "mu",
    "theta_mu",
    "mu_inverse_tau",
    "bisect_decreasing",
    "theta_second_derivative_at_zero",
    "beta",
    "log_beta",
    "beta_inverse_zero",
    "alpha_dagger",
    "RateCurve",
    "count_upper_bound",
    "log_count_upper_bound",
    "tightest_count_tau",
    "sandwich_constant",
]
