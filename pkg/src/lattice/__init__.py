"""Exact lattices, enumeration and brute-force oracles"""
from .basis import (
    basis_from_generators,
    build_lattice,
    contains,
    coordinates,
    gram_determinant,
    lattice_from_columns,
)
from .enumeration import count_points, dist_p, enumerate_points, lambda1_p
from .oracles import classify_maxlin, classify_promise_instance, max_satisfiable, solve_maxlin_exact

__all__ = [
    "basis_from_generators",
    "build_lattice",
    "contains",
    "coordinates",
    "gram_determinant",
    "lattice_from_columns",
    "enumerate_points",
    "count_points",
    "dist_p",
    "lambda1_p",
    "max_satisfiable",
    "solve_maxlin_exact",
    "classify_maxlin",
    "classify_promise_instance",
]
