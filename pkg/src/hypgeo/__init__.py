"""Hyperbolic hypergeometric scheme functions: s_b, q-series, contour integrals,
difference operators and the checks that tie them together."""

from .hyperbolic_gamma import BContext, log_sb, sb
from .qseries import Family, QPolyFamily, qhyper, qpoch, qpoly_eval

__version__ = "0.1.0"

__all__ = ["BContext", "Family", "QPolyFamily", "log_sb", "qhyper", "qpoch", "qpoly_eval", "sb", "__version__"]
