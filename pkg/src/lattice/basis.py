"""
Exact lattice bases.

Generators are columns of a rational matrix. The basis is the column
Hermite form: lower triangular along increasing pivot rows, positive
pivots, and entries left of each pivot reduced into [0, pivot).
"""

import logging
from fractions import Fraction
from math import lcm
from typing import Any, List, Optional, Sequence, Tuple

from ..errors import InputError
from ..records.models import LatticeDescription, RationalMatrix

logger = logging.getLogger(__name__)


def _common_denominator(matrix: RationalMatrix) -> int:
    den = 1
    for row in matrix.entries:
        for x in row:
            den = lcm(den, x.denominator)
    return den


def _column_hermite(columns: List[List[int]], dim: int) -> Tuple[List[List[int]], List[int]]:
    """Integer column Hermite form; returns (basis columns, pivot rows)."""
    active = [c for c in columns if any(c)]
    basis: List[List[int]] = []
    pivots: List[int] = []
    for row in range(dim):
        live = [c for c in active if c[row] != 0]
        rest = [c for c in active if c[row] == 0]
        # Euclid on the entries of this row
        while len(live) > 1:
            live.sort(key=lambda c: abs(c[row]))
            lead = live[0]
            reduced = [lead]
            for c in live[1:]:
                f = c[row] // lead[row]
                c = [a - f * b for a, b in zip(c, lead)]
                if c[row] != 0:
                    reduced.append(c)
                elif any(c):
                    rest.append(c)
            live = reduced
        if live:
            pivot = live[0]
            if pivot[row] < 0:
                pivot = [-a for a in pivot]
            for k, prior in enumerate(basis):
                f = prior[row] // pivot[row]
                if f:
                    basis[k] = [a - f * b for a, b in zip(prior, pivot)]
            basis.append(pivot)
            pivots.append(row)
        active = rest
    return basis, pivots


def basis_from_generators(gen: RationalMatrix) -> RationalMatrix:
    """Canonical basis of the lattice spanned by the columns of `gen`."""
    return build_lattice(gen).basis


def build_lattice(gen: RationalMatrix) -> LatticeDescription:
    """Lattice description with the cached Hermite basis."""
    if gen.cols == 0 or not any(x != 0 for row in gen.entries for x in row):
        raise InputError("generating matrix has no nonzero column")
    den = _common_denominator(gen)
    columns = [[int(x * den) for x in col] for col in gen.columns()]
    basis_cols, pivots = _column_hermite(columns, gen.rows)
    basis = RationalMatrix.from_columns(
        [[Fraction(a, den) for a in col] for col in basis_cols], dim=gen.rows
    )
    logger.debug(f"Hermite basis: dim={gen.rows}, generators={gen.cols}, rank={len(pivots)}")
    return LatticeDescription(
        generators=gen,
        basis=basis,
        pivot_rows=tuple(pivots),
        rank=len(pivots),
        dim=gen.rows,
    )


def lattice_from_columns(columns: Sequence[Sequence[Any]]) -> LatticeDescription:
    return build_lattice(RationalMatrix.from_columns([list(c) for c in columns]))


def coordinates(lat: LatticeDescription, v: Sequence[Any]) -> Optional[Tuple[int, ...]]:
    """Integer coefficients of v in the basis, or None when v is not in the lattice."""
    if len(v) != lat.dim:
        raise InputError(f"vector of length {len(v)} in a lattice of dimension {lat.dim}")
    v = [Fraction(x) for x in v]
    basis = lat.basis
    coeffs: List[int] = []
    for k, row in enumerate(lat.pivot_rows):
        residual = v[row] - sum((c * basis.entries[row][j] for j, c in enumerate(coeffs)), Fraction(0))
        ck = residual / basis.entries[row][k]
        if ck.denominator != 1:
            return None
        coeffs.append(int(ck))
    if tuple(basis.apply(coeffs)) != tuple(v):
        return None
    return tuple(coeffs)


def contains(lat: LatticeDescription, v: Sequence[Any]) -> bool:
    return coordinates(lat, v) is not None


def _determinant(rows: List[List[Fraction]]) -> Fraction:
    m = [list(r) for r in rows]
    n = len(m)
    det = Fraction(1)
    for i in range(n):
        pivot = next((r for r in range(i, n) if m[r][i] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != i:
            m[i], m[pivot] = m[pivot], m[i]
            det = -det
        det *= m[i][i]
        for r in range(i + 1, n):
            f = m[r][i] / m[i][i]
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[i])]
    return det


def gram_determinant(lat: LatticeDescription) -> Fraction:
    """det(B^T B), the squared covolume of the lattice."""
    cols = lat.basis.columns()
    gram = [[sum((a * b for a, b in zip(ci, cj)), Fraction(0)) for cj in cols] for ci in cols]
    return _determinant(gram)
