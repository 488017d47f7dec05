"""Integer gadgets: shift search, SVP constants and BDD constants"""
from .bdd import bdd_gadget_params
from .shift import find_gadget_shift, nu2, verify_shift
from .svp import count_ratio_trend, svp_gadget_params, verify_gadget_counts

__all__ = [
    "nu2",
    "find_gadget_shift",
    "verify_shift",
    "svp_gadget_params",
    "verify_gadget_counts",
    "count_ratio_trend",
    "bdd_gadget_params",
]
