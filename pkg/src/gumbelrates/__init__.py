"""Exact distances between normalized Gaussian maxima and the Gumbel law.

The package evaluates the law of ``Y_n = a_n (max(X_1..X_n) - b_n)`` exactly
under three norming schemes, computes five probability distances to the
standard Gumbel law, and compares them with closed-form convergence rates.
"""
__version__ = "0.1.0"

from .exact_law import GumbelLaw, MaxLaw, expected_log_phi_identity, max_law
from .metrics import KLRoute, MetricKind, MetricResult, QuadratureConfig, compute_metric
from .norming import ExpansionWindow, NormingScheme, SchemeKind, make_scheme, window_of
from .rates import RatePrediction, compute_constant, finite_n_prediction, predict, ratio_table

__all__ = [
    "ExpansionWindow",
    "GumbelLaw",
    "KLRoute",
    "MaxLaw",
    "MetricKind",
    "MetricResult",
    "NormingScheme",
    "QuadratureConfig",
    "RatePrediction",
    "SchemeKind",
    "__version__",
    "compute_constant",
    "compute_metric",
    "expected_log_phi_identity",
    "finite_n_prediction",
    "make_scheme",
    "max_law",
    "predict",
    "ratio_table",
    "window_of",
]
