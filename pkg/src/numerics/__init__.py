"""Error-tracked arithmetic"""
from .bounded import (
    BoundedValue,
    Comparison,
    Number,
    as_bounded,
    bounded_max,
    bounded_sum,
    decide,
    format_decimal,
    mpf_to_fraction,
    rational_above,
    rational_below,
    to_fraction,
    to_mpf,
    unit_roundoff,
    working_precision,
)

__all__ = [
    "BoundedValue",
    "Comparison",
    "Number",
    "as_bounded",
    "bounded_max",
    "bounded_sum",
    "decide",
    "format_decimal",
    "mpf_to_fraction",
    "rational_above",
    "rational_below",
    "to_fraction",
    "to_mpf",
    "unit_roundoff",
    "working_precision",
]
