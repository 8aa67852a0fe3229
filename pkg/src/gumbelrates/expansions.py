"""Finite-n asymptotic expansions of the tail, CDF, density and moments of ``Y_n``.

Every scheme admits the same second-order structure in ``1/log n``::

    n Psi(z(x))          ~ exp(-x) (1 - A(x))
    F_n(x) - Lambda(x)   ~ Lambda(x) exp(-x) A(x)
    log(f_n / lambda)(x) ~ r(x) = exp(-x) A(x) - B(x)

with scheme-specific quadratics ``A`` and ``B``:

============  ==============================  ==========================
scheme        A(x)                            B(x)
============  ==============================  ==========================
classical     (t^2 + 2t + 2) / (4 log n)      t^2 / (4 log n)
hall          (x^2 + 2x + 2) / (2 b^2)        x^2 / (2 b^2)
second        (x^2 + 2x + 2 - 2cx)/(4 log n)  (x^2 - 2cx + 2c)/(4 log n)
============  ==============================  ==========================

where ``t = x - c``. The public predictors only evaluate inside the expansion
window and raise :class:`OutsideWindowError` elsewhere; the bracket functions
``bracket_a``, ``bracket_b``, ``log_ratio_bracket`` are unrestricted and used to
build integrated finite-n metric predictors.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .norming import NormingScheme, SchemeKind, make_scheme, window_of
from .special_fn import EULER_GAMMA

__all__ = [
    "ExpansionTerm",
    "MomentPredictions",
    "OutsideWindowError",
    "PdfOrder",
    "bracket_a",
    "bracket_b",
    "cdf_error_expansion",
    "log_ratio_bracket",
    "log_ratio_bracket_derivative",
    "moment_predictions",
    "pdf_expansion",
    "tail_expansion",
]


class OutsideWindowError(ValueError):
    """Expansion requested outside ``[-log(log n)/4, (log n)^(1/4)]``."""


class PdfOrder(str, enum.Enum):
    SECOND = "second"
    REFINED = "refined"


@dataclass(frozen=True)
class ExpansionTerm:
    """A predicted value and the magnitude of its stated error envelope."""

    value: float | np.ndarray
    error_scale: float | np.ndarray


def _check_window(scheme: NormingScheme, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    w = window_of(scheme.n)
    if np.any(x < w.lo) or np.any(x > w.hi):
        raise OutsideWindowError(
            f"x must lie in the expansion window [{w.lo:.6g}, {w.hi:.6g}] for n={scheme.n:g}"
        )
    return x


def _pack(value, scale, like) -> ExpansionTerm:
    if np.ndim(like) == 0:
        return ExpansionTerm(float(value), float(scale))
    return ExpansionTerm(value, scale)


def _denominator(scheme: NormingScheme) -> float:
    # 4 log n for classical/second, 2 b^2 for Hall.
    if scheme.kind is SchemeKind.HALL:
        return 2.0 * scheme.b**2
    return 4.0 * scheme.log_n


def bracket_a(scheme: NormingScheme, x):
    """First-order tail correction ``A(x)``: ``n Psi(z) ~ e^-x (1 - A)``."""
    x = np.asarray(x, dtype=float)
    d = _denominator(scheme)
    if scheme.kind is SchemeKind.HALL:
        return (x * x + 2.0 * x + 2.0) / d
    if scheme.kind is SchemeKind.CLASSICAL:
        t = x - scheme.c
        return (t * t + 2.0 * t + 2.0) / d
    return (x * x + 2.0 * x + 2.0 - 2.0 * scheme.c * x) / d


def _bracket_a_prime(scheme: NormingScheme, x):
    x = np.asarray(x, dtype=float)
    d = _denominator(scheme)
    if scheme.kind is SchemeKind.HALL:
        return (2.0 * x + 2.0) / d
    if scheme.kind is SchemeKind.CLASSICAL:
        return (2.0 * (x - scheme.c) + 2.0) / d
    return (2.0 * x + 2.0 - 2.0 * scheme.c) / d


def bracket_b(scheme: NormingScheme, x):
    """First-order part ``B(x)`` of the exact exponent ``q(x)``."""
    x = np.asarray(x, dtype=float)
    d = _denominator(scheme)
    if scheme.kind is SchemeKind.HALL:
        return x * x / d
    if scheme.kind is SchemeKind.CLASSICAL:
        t = x - scheme.c
        return t * t / d
    c = scheme.c
    return (x * x - 2.0 * c * x + 2.0 * c) / d


def _bracket_b_prime(scheme: NormingScheme, x):
    x = np.asarray(x, dtype=float)
    d = _denominator(scheme)
    if scheme.kind is SchemeKind.HALL:
        return 2.0 * x / d
    if scheme.kind is SchemeKind.CLASSICAL:
        return 2.0 * (x - scheme.c) / d
    return (2.0 * x - 2.0 * scheme.c) / d


def log_ratio_bracket(scheme: NormingScheme, x):
    """``r(x) = e^-x A(x) - B(x)``, the second-order ``log(f_n/lambda)``."""
    x = np.asarray(x, dtype=float)
    return np.exp(-x) * bracket_a(scheme, x) - bracket_b(scheme, x)


def log_ratio_bracket_derivative(scheme: NormingScheme, x):
    """``r'(x)``, the second-order approximation of the score of ``f_n/lambda``."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-x)
    return e * (_bracket_a_prime(scheme, x) - bracket_a(scheme, x)) - _bracket_b_prime(scheme, x)


def _envelope(scheme: NormingScheme, x) -> np.ndarray:
    # Relative size of the neglected terms, ~ t^4/(log n)^2. The floor of 1 on
    # t^4 matters once c_n lies inside the window, where t = 0 but the
    # remainder does not vanish.
    x = np.asarray(x, dtype=float)
    if scheme.kind is SchemeKind.HALL:
        return (1.0 + x**4) / scheme.b**4
    t = x - scheme.c
    env = (1.0 + t**4) / scheme.log_n**2
    if scheme.kind is SchemeKind.SECOND_ORDER:
        env = env * scheme.c**2
    return env


def tail_expansion(scheme: NormingScheme, x) -> ExpansionTerm:
    """``Psi(z(x)) ~ (1/n) e^-x (1 - A(x))``."""
    xa = _check_window(scheme, x)
    val = np.exp(-xa - math.log(scheme.n)) * (1.0 - bracket_a(scheme, xa))
    return _pack(val, np.abs(val) * _envelope(scheme, xa), x)


def cdf_error_expansion(scheme: NormingScheme, x) -> ExpansionTerm:
    """``F_n(x) - Lambda(x) ~ Lambda(x) e^-x A(x)``.

    The error scale is absolute: ``Lambda e^-x`` times the neglected
    ``t^4/(log n)^2`` terms of ``n Psi``, plus the second Taylor term
    ``Lambda e^-2x A^2 / 2`` of ``exp(e^-x A) - 1``. Relative to the prediction
    these are ``O(t^2/log n)`` and ``O((log n)^(-1/4))``; ``A`` also vanishes
    inside the window for the second-order scheme.
    """
    xa = _check_window(scheme, x)
    a = bracket_a(scheme, xa)
    e = np.exp(-xa)
    lam = np.exp(-xa - e)
    env = _envelope(scheme, xa)
    if scheme.kind is SchemeKind.SECOND_ORDER:
        env = env / scheme.c**2
    return _pack(lam * a, lam * (env + 0.5 * e * a * a), x)


def _refined_bracket(scheme: NormingScheme, x: np.ndarray) -> np.ndarray:
    L = scheme.log_n
    t = x - scheme.c
    e = np.exp(-x)
    quad = t * t + 2.0 * t + 2.0
    first = (e * quad - t * t) / (4.0 * L)
    second = (
        t**4
        - e * (3.0 * t**4 + 8.0 * t**3 + 16.0 * t * t + 24.0 * t + 24.0)
        + e * e * quad * quad
    ) / (32.0 * L * L)
    return 1.0 + first + second


def pdf_expansion(scheme: NormingScheme, x, order=PdfOrder.SECOND) -> ExpansionTerm:
    """Density expansion ``lambda(x) (1 + r(x))`` or its refined classical form.

    The refined order adds every ``1/(log n)^2`` term (coefficients of ``1``,
    ``e^-x`` and ``e^-2x``, polynomials up to ``t^4``) and is only available for
    the classical scheme.
    """
    order = PdfOrder(order)
    xa = _check_window(scheme, x)
    lam = np.exp(-xa - np.exp(-xa))
    if order is PdfOrder.SECOND:
        val = lam * (1.0 + log_ratio_bracket(scheme, xa))
        if scheme.kind is SchemeKind.HALL:
            env = (1.0 + xa**4) / scheme.b**4
        else:
            env = (1.0 + (xa - scheme.c) ** 4) / scheme.log_n**1.5
        return _pack(val, np.abs(val) * env, x)
    if scheme.kind is not SchemeKind.CLASSICAL:
        raise ValueError("the refined density expansion is available for the classical scheme only")
    val = lam * _refined_bracket(scheme, xa)
    env = (1.0 + np.abs(xa - scheme.c) ** 6) / scheme.log_n**2.25
    return _pack(val, np.abs(val) * env, x)


@dataclass(frozen=True)
class MomentPredictions:
    mean: ExpansionTerm
    exp_moment: ExpansionTerm
    mean_coefficient: float


def moment_predictions(n: float, coefficient: str = "gamma+1") -> MomentPredictions:
    """Predicted ``E[Y_n]`` and ``E[exp(-Y_n) - t^2(Y_n)/(4 log n)]`` (classical scheme).

    ``coefficient`` selects the multiplier of ``c/(2 log n)`` in the mean:
    ``"gamma+1"`` (default) or ``"gamma"``. Which one fits the exact law is
    decided numerically by :func:`gumbelrates.rates.arbitrate_mean_coefficient`.
    """
    if float(n) < 16.0:
        raise ValueError("moment predictions require n >= 16")
    scheme = make_scheme(SchemeKind.CLASSICAL, n)
    L, c = scheme.log_n, scheme.c
    if coefficient == "gamma+1":
        k = EULER_GAMMA + 1.0
    elif coefficient == "gamma":
        k = EULER_GAMMA
    else:
        raise ValueError("coefficient must be 'gamma' or 'gamma+1'")
    mean = EULER_GAMMA - c * c / (4.0 * L) + k * c / (2.0 * L)
    expm = 1.0 + c**4 / (32.0 * L * L)
    return MomentPredictions(
        mean=ExpansionTerm(mean, 1.0 / L),
        exp_moment=ExpansionTerm(expm, c**4 / (32.0 * L * L)),
        mean_coefficient=k,
    )
