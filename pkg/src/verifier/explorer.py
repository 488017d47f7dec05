"""
Numeric explorers: the sign of Theta_p(tau, 1/2) - Theta_p(tau, 0) over a
(p, tau) grid, and the BDD threshold alpha_dagger(p) as a table.
"""

import logging
from typing import Any, Iterable, Optional

import pandas as pd
from mpmath import mp

from ..config.settings import settings
from ..numerics.bounded import Comparison, to_fraction, working_precision
from ..records.models import ThetaParams
from ..theta.rates import alpha_dagger
from ..theta.series import theta

logger = logging.getLogger(__name__)

CONJECTURE_COLUMNS = ["p", "tau", "sign", "margin", "status"]
ALPHA_DAGGER_COLUMNS = ["p", "alpha_dagger", "abs_error", "heuristic"]

_SIGNS = {Comparison.GREATER: "+", Comparison.LESS: "-", Comparison.INDETERMINATE: "?"}


def explore_conjecture(p_grid: Iterable[Any], tau_grid: Iterable[Any], digits: Optional[int] = None) -> pd.DataFrame:
    """One row per (p, tau): sign of Theta(tau, 1/2) - Theta(tau, 0) and whether it is decided."""
    taus = [to_fraction(t) for t in tau_grid]
    rows = []
    with working_precision(digits or settings.verifier.explorer_digits):
        for p in (to_fraction(x) for x in p_grid):
            for tau in taus:
                diff = theta(ThetaParams(p=p, tau=tau, t=to_fraction("1/2"))) - theta(ThetaParams(p=p, tau=tau))
                c = diff.compare(0)
                rows.append(
                    {
                        "p": float(p),
                        "tau": float(tau),
                        "sign": _SIGNS[c],
                        "margin": float(diff.value),
                        "status": "indeterminate" if c is Comparison.INDETERMINATE else "decided",
                    }
                )
    frame = pd.DataFrame.from_records(rows, columns=CONJECTURE_COLUMNS)
    if len(frame):
        positive = int((frame["sign"] == "+").sum())
        logger.info(f"Conjecture grid: {len(frame)} points, {positive} positive")
    return frame


def alpha_dagger_table(p_values: Iterable[Any]) -> pd.DataFrame:
    rows = []
    for p in p_values:
        value = alpha_dagger(p)
        rows.append(
            {
                "p": float(to_fraction(p)),
                "alpha_dagger": float(value.value),
                "abs_error": float(value.abs_error),
                "heuristic": value.heuristic,
            }
        )
        logger.debug(f"alpha_dagger({p}) = {mp.nstr(value.value, 8)}")
    return pd.DataFrame.from_records(rows, columns=ALPHA_DAGGER_COLUMNS)
