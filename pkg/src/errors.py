"""
Error hierarchy shared by every module.
Each error carries a stable `kind` string and the CLI exit code it maps to.
"""

from typing import Any, Optional


class LatforgeError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 1
    default_kind = "error"

    def __init__(self, message: str, kind: Optional[str] = None, **details: Any):
        super().__init__(message)
        self.kind = kind or self.default_kind
        self.details = details

    def __str__(self) -> str:
        return f"{self.kind}: {self.args[0]}"


class InputError(LatforgeError):
    """Malformed input or violated precondition"""
    exit_code = 2
    default_kind = "precondition"


class InfeasibleError(LatforgeError):
    """Parameters admit no valid construction"""
    exit_code = 3
    default_kind = "parameter-infeasible"


class NoSolutionError(InfeasibleError):
    """Inverse lookup outside the attainable range"""
    default_kind = "no-solution"


class BudgetExceededError(LatforgeError):
    """A desk-scale guard tripped"""
    exit_code = 4
    default_kind = "budget-exceeded"


class IndeterminateError(LatforgeError):
    """A comparison could not be decided at the available precision"""
    exit_code = 5
    default_kind = "indeterminate"


class NumericAssertionError(IndeterminateError):
    """A numerically asserted property (monotonicity, positivity) failed"""
    default_kind = "numeric-assertion"


__all__ = [
    "LatforgeError",
    "InputError",
    "InfeasibleError",
    "NoSolutionError",
    "BudgetExceededError",
    "IndeterminateError",
    "NumericAssertionError",
]
