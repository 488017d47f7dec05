"""
Brute-force oracles: exhaustive MAXLIN and promise classification.
"""

import logging
from fractions import Fraction
from typing import Any, Optional, Sequence, Tuple, Union

import numpy as np

from ..config.settings import settings
from ..errors import BudgetExceededError, IndeterminateError, InputError
from ..numerics.bounded import BoundedValue, Comparison, as_bounded
from ..records.models import (
    CvpInstance,
    MaxLinInstance,
    MaxLinSolution,
    NormSpec,
    ProblemKind,
    PromiseClass,
    SvpInstance,
)
from .enumeration import dist_p, lambda1_p

logger = logging.getLogger(__name__)

CHUNK_BITS = 20


def max_satisfiable(matrix: Sequence[Sequence[int]], rhs: Sequence[int], n: int) -> Tuple[Tuple[int, ...], int]:
    """
    Best assignment of x in F_2^n for the system matrix x = rhs.

    Assignments are scanned as integers with x_1 as the most significant bit,
    so the first maximiser is the lexicographically smallest one.
    """
    if n > settings.budget.max_maxlin_vars:
        raise BudgetExceededError(
            f"{n} variables exceeds the exhaustive budget of {settings.budget.max_maxlin_vars}", n=n
        )
    if not matrix:
        return tuple([0] * n), 0

    masks = np.array(
        [sum(int(bit) << (n - 1 - i) for i, bit in enumerate(row)) for row in matrix], dtype=np.uint64
    )
    targets = np.array(rhs, dtype=np.uint8)
    total = 1 << n
    best_value, best_index = -1, 0
    for start in range(0, total, 1 << CHUNK_BITS):
        xs = np.arange(start, min(total, start + (1 << CHUNK_BITS)), dtype=np.uint64)
        satisfied = np.zeros(len(xs), dtype=np.int32)
        for mask, target in zip(masks, targets):
            parity = (np.bitwise_count(xs & mask) & 1).astype(np.uint8)
            satisfied += parity == target
        k = int(np.argmax(satisfied))
        if satisfied[k] > best_value:
            best_value, best_index = int(satisfied[k]), start + k
    assignment = tuple((best_index >> (n - 1 - i)) & 1 for i in range(n))
    return assignment, best_value


def solve_maxlin_exact(inst: MaxLinInstance) -> MaxLinSolution:
    """Exhaustive maximum over all 2^n assignments."""
    assignment, satisfied = max_satisfiable(inst.matrix, inst.rhs, inst.n)
    logger.debug(f"MAXLIN m={inst.m} n={inst.n}: OPT={satisfied} at {assignment}")
    return MaxLinSolution(assignment=assignment, satisfied=satisfied, m=inst.m)


def classify_maxlin(inst: MaxLinInstance, solution: Optional[MaxLinSolution] = None) -> PromiseClass:
    """YES when at least c m equations hold, NO when at most s m do."""
    solution = solution or solve_maxlin_exact(inst)
    if solution.satisfied >= inst.c * inst.m:
        return PromiseClass.YES
    if solution.satisfied <= inst.s * inst.m:
        return PromiseClass.NO
    return PromiseClass.NEITHER


def at_most(value: Any, bound: Any, what: str = "a bounded comparison") -> bool:
    """value <= bound, exactly for rationals; raises when bounded values overlap."""
    if isinstance(value, Fraction) and isinstance(bound, Fraction):
        return value <= bound
    c = as_bounded(value).compare(as_bounded(bound))
    if c is Comparison.INDETERMINATE:
        raise IndeterminateError(f"cannot decide {what}")
    return c is Comparison.LESS


def classify_promise_instance(
    kind: ProblemKind, instance: Union[CvpInstance, SvpInstance], norm: Optional[NormSpec] = None
) -> PromiseClass:
    """YES when the distance is at most r, NO when it exceeds gamma r, NEITHER in between."""
    norm = norm or instance.norm
    if kind is ProblemKind.CVP:
        if not isinstance(instance, CvpInstance):
            raise InputError("CVP classification needs a CVP instance")
        value = dist_p(instance.lattice, norm, instance.target).distance_pth_power
    elif kind is ProblemKind.SVP:
        if not isinstance(instance, SvpInstance):
            raise InputError("SVP classification needs an SVP instance")
        value = lambda1_p(instance.lattice, norm).distance_pth_power
    else:
        raise InputError(f"no promise classification for {kind.value}")

    radius = instance.radius_pth_power
    far = instance.gamma_pth_power * radius
    if at_most(value, radius, "the YES side of the promise"):
        return PromiseClass.YES
    if not at_most(value, far, "the NO side of the promise"):
        return PromiseClass.NO
    return PromiseClass.NEITHER
