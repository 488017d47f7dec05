"""
Gadget constants for the SVP reduction and their brute-force check.

With shift t found at parameter tau:
    rho      = theta(tau, t) / max over even l0 of theta(tau, l0 t mod 1)
    delta    < log rho / (tau mu + log rho), taken at half the bound
    C_r^p    = mu / (1 - delta)
    phi0     = rho exp(-tau delta C_r^p)
    phi1     = exp(tau delta C_r^p (sqrt(sigma) - 1))
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from mpmath import mp

from ..config.settings import settings
from ..errors import BudgetExceededError, IndeterminateError, InfeasibleError, InputError
from ..lattice.basis import build_lattice
from ..lattice.enumeration import count_points
from ..numerics.bounded import (
    BoundedValue,
    as_bounded,
    decide,
    rational_above,
    rational_below,
    to_fraction,
    working_precision,
)
from ..records.models import (
    CountRow,
    GadgetCountReport,
    GadgetParams,
    GadgetVariant,
    NormSpec,
    RationalMatrix,
    ThetaParams,
    fold_shift,
)
from ..theta.counting import count_upper_bound
from ..theta.series import theta, theta_mu
from .shift import HALF, bounded_residue_max, canonical_residue, find_gadget_shift, residue_order

logger = logging.getLogger(__name__)


def _even_residues(witness_k: int, z: int) -> List[int]:
    return sorted({canonical_residue(l0 * witness_k, z) for l0 in range(0, 2 ** z, 2)})


def _all_residues(witness_k: int, z: int) -> List[int]:
    return sorted({canonical_residue(l1 * witness_k, z) for l1 in range(2 ** z)})


def svp_gadget_params(p: Any, sigma: Any, digits: Optional[int] = None) -> GadgetParams:
    """Gadget constants (rho, delta, phi0, phi1, C_r) for exponent p and gap sigma."""
    p = to_fraction(p)
    sigma = to_fraction(sigma)
    if p <= 2:
        raise InputError(f"integer gadgets need p > 2, got {p}")
    if sigma <= 1:
        raise InputError(f"sigma must exceed 1, got {sigma}")

    t, witness = find_gadget_shift(p)
    tau = witness.tau
    with working_precision(digits):
        theta_t, mu_t = theta_mu(ThetaParams(p=p, tau=tau, t=t))
        if t == HALF:
            even_max = theta(ThetaParams(p=p, tau=tau, t=0))
        else:
            even_max = bounded_residue_max(p, tau, witness.z, _even_residues(witness.chosen_k, witness.z))
        rho = theta_t / even_max
        if not decide(rho.compare(1), "rho > 1"):
            raise InfeasibleError(f"rho = {rho!r} is not above 1")

        log_rho = rho.log()
        bound = log_rho / (tau * mu_t + log_rho)
        delta = rational_below(bound / 2)
        if delta <= 0 or not as_bounded(delta).certainly_less(bound):
            raise IndeterminateError(f"delta below {bound!r} could not be fixed")

        one_minus = BoundedValue.exact(1 - delta)
        c_r_pth = mu_t / one_minus
        c_r = c_r_pth.root(p)
        decay = as_bounded(tau) * delta * c_r_pth
        phi0 = rho * (-decay).exp()
        phi1 = (decay * (as_bounded(sigma).sqrt() - 1)).exp()
        for name, phi in (("phi0", phi0), ("phi1", phi1)):
            if not decide(phi.compare(1), f"{name} > 1"):
                raise InfeasibleError(f"{name} = {phi!r} is not above 1")

    logger.info(
        f"SVP gadget p={p}: t={t}, tau={tau}, rho={mp.nstr(rho.value, 12)}, delta={float(delta):.6g}, "
        f"phi0={mp.nstr(phi0.value, 12)}, phi1={mp.nstr(phi1.value, 12)}"
    )
    return GadgetParams(
        variant=GadgetVariant.SVP,
        p=p,
        t=t,
        tau=tau,
        mu=mu_t,
        rho=rho,
        delta=delta,
        phi0=phi0,
        phi1=phi1,
        C_r=c_r,
        C_r_pth_power=c_r_pth,
        sigma=sigma,
        witness=witness,
    )


def _count_row(
    label: str, p: Fraction, tau: Any, d: int, shift: Fraction, radius: Fraction
) -> CountRow:
    lattice = build_lattice(RationalMatrix.identity(d))
    center = [shift] * d
    count = count_points(lattice, NormSpec(p=p), center, radius)
    bound = count_upper_bound(p, tau, radius, center)
    holds = count == 0 or not as_bounded(count).certainly_greater(bound)
    return CountRow(
        label=label, shift=shift, radius_pth_power=radius, count=count, upper_bound=bound, holds=bool(holds)
    )


def verify_gadget_counts(params: GadgetParams, d: int) -> GadgetCountReport:
    """
    Exact counts in Z^d around the gadget shifts against their theta bounds.

    Radii are rounded up to rationals, so each bound is checked at the radius
    actually enumerated.
    """
    if params.variant is not GadgetVariant.SVP:
        raise InputError("count verification is defined for SVP gadgets")
    if not 1 <= d <= settings.budget.max_gadget_dim:
        raise BudgetExceededError(f"gadget dimension {d} outside 1..{settings.budget.max_gadget_dim}", d=d)

    p, t, tau, delta = params.p, params.t, params.tau, params.delta
    with working_precision():
        radius = params.C_r_pth_power * d
        close_radius = rational_above(radius * (1 - delta))
        full_radius = rational_above(radius)
        shrink = 1 - as_bounded(delta) * as_bounded(params.sigma).sqrt()
        far_radius = rational_above(radius * shrink) if shrink.lower > 0 else Fraction(0)

    z, k = params.witness.z, params.witness.chosen_k
    evens = _even_residues(k, z)
    everything = _all_residues(k, z)
    cap = settings.gadget.max_residues
    even_checked = residue_order(p, tau, z, evens)[:cap]
    all_checked = residue_order(p, tau, z, everything)[:cap]

    rows = [_count_row("close", p, tau, d, t, close_radius)]
    for r in even_checked:
        rows.append(_count_row(f"even:{r}", p, tau, d, fold_shift(Fraction(r, 2 ** z)), full_radius))
    for r in all_checked:
        rows.append(_count_row(f"any:{r}", p, tau, d, fold_shift(Fraction(r, 2 ** z)), far_radius))

    close = rows[0].count
    short = next(row.count for row in rows if row.label == "even:0") if 0 in even_checked else None
    ratios: Dict[str, float] = {}
    if short:
        ratios["close_over_short"] = close / short
    worst_even = max(row.count for row in rows if row.label.startswith("even:"))
    worst_any = max(row.count for row in rows if row.label.startswith("any:"))
    ratios["close_over_even_max"] = close / worst_even if worst_even else float("inf")
    ratios["close_over_any_max"] = close / worst_any if worst_any else float("inf")

    report = GadgetCountReport(
        p=p,
        d=d,
        rows=rows,
        ratios=ratios,
        all_bounds_hold=all(row.holds for row in rows),
        residues_checked=len(even_checked) + len(all_checked),
        residues_total=len(evens) + len(everything),
    )
    logger.info(f"Gadget counts d={d}: close={close}, ratios={ratios}, bounds hold={report.all_bounds_hold}")
    return report


def count_ratio_trend(params: GadgetParams, dims: Sequence[int]) -> Tuple[pd.DataFrame, float]:
    """Count reports for several d and the fitted slope of log(close / short) in d."""
    records = []
    for d in dims:
        report = verify_gadget_counts(params, d)
        row = {"d": d, "all_bounds_hold": report.all_bounds_hold}
        row.update(report.ratios)
        row.update({r.label: r.count for r in report.rows})
        records.append(row)
    frame = pd.DataFrame.from_records(records)
    slope = float("nan")
    if "close_over_short" in frame and len(frame) >= 2:
        slope = float(np.polyfit(frame["d"], np.log(frame["close_over_short"]), 1)[0])
    return frame, slope
