"""
MAXLIN to CVP.

The system M x = v over F_2 becomes the lattice generated by [M | 2 I_m]
with target v. A lattice vector B(x, y) - v reduces mod 2 to M x - v, so
each violated equation costs at least 1 in every coordinate norm and each
satisfied one costs 0; the p-th power distance is exactly m - OPT.
"""

import logging
from fractions import Fraction
from typing import Optional

import numpy as np

from ..lattice.basis import build_lattice
from ..records.models import CvpInstance, MaxLinInstance, NormSpec, RationalMatrix

logger = logging.getLogger(__name__)


def maxlin_to_cvp(inst: MaxLinInstance, norm: NormSpec) -> CvpInstance:
    """Generators [M | 2 I_m], target v, r^p = 3m/8 and gamma^p = 1 + 8 epsilon / 3."""
    m = inst.m
    columns = [[row[j] for row in inst.matrix] for j in range(inst.n)]
    columns += [[2 if i == k else 0 for i in range(m)] for k in range(m)]
    lattice = build_lattice(RationalMatrix.from_columns(columns))
    cvp = CvpInstance(
        lattice=lattice,
        target=tuple(Fraction(x) for x in inst.rhs),
        radius_pth_power=Fraction(3 * m, 8),
        gamma_pth_power=1 + Fraction(8, 3) * inst.epsilon,
        norm=norm,
    )
    logger.debug(f"MAXLIN m={m} n={inst.n} -> CVP in dimension {m}, rank {lattice.rank}")
    return cvp


def random_maxlin_instance(
    rng: np.random.Generator, n: int, m: int, epsilon: Optional[Fraction] = None
) -> MaxLinInstance:
    """Uniform 0/1 system with at least one nonzero coefficient per row."""
    matrix = rng.integers(0, 2, size=(m, n))
    for row in matrix:
        if not row.any():
            row[rng.integers(0, n)] = 1
    rhs = rng.integers(0, 2, size=m)
    fields = {"matrix": tuple(tuple(int(x) for x in row) for row in matrix), "rhs": tuple(int(x) for x in rhs)}
    if epsilon is not None:
        fields["epsilon"] = epsilon
    return MaxLinInstance(**fields)
