"""
latforge
Hardness reductions for lattice problems in l_p norms, with exact
and interval-certified checks of the numeric claims they rest on.
"""

__version__ = "0.1.0"
