"""Standard normal and Gumbel-weighted special functions, accurate in the far tails.

Everything downstream lives near ``z = sqrt(2 log n)`` where ``1 - Phi(z)`` is of
order ``1/n``; the upper tail is therefore always computed from the scaled
complementary error function and never as ``1 - Phi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import erfcx, ndtri

from ._numerics import QuadratureError, integrate

__all__ = [
    "EULER_GAMMA",
    "GumbelWeightedIntegrand",
    "exp_integral_at_minus_one",
    "gumbel_weighted_integral",
    "log_normal_cdf",
    "log_normal_pdf",
    "log_normal_tail",
    "n_log_normal_cdf",
    "normal_cdf",
    "normal_pdf",
    "normal_quantile",
    "normal_tail",
]

EULER_GAMMA = float(np.euler_gamma)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_HALF = math.sqrt(0.5)
_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)


def _checked(z) -> np.ndarray:
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("normal special functions require finite input")
    return arr


def _out(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _half_square(z: np.ndarray) -> np.ndarray:
    # z**2/2 with the leading part split off exactly so exp(-z**2/2) keeps full
    # relative precision out to z ~ 40.
    zh = np.floor(z * 16.0) / 16.0
    return 0.5 * zh * zh + 0.5 * (z - zh) * (z + zh)


def log_normal_pdf(z):
    """log phi(z)."""
    a = _checked(z)
    return _out(-_LOG_SQRT_2PI - _half_square(np.abs(a)), z)


def normal_pdf(z):
    """phi(z), the standard normal density."""
    a = _checked(z)
    return _out(np.exp(-_LOG_SQRT_2PI - _half_square(np.abs(a))), z)


def _upper(u: np.ndarray) -> np.ndarray:
    # Psi(u) for u >= 0.
    return 0.5 * erfcx(u * _SQRT_HALF) * np.exp(-_half_square(u))


def _log_upper(u: np.ndarray) -> np.ndarray:
    # log Psi(u) for u >= 0; stays finite far beyond the underflow of Psi.
    return np.log(0.5 * erfcx(u * _SQRT_HALF)) - _half_square(u)


def normal_tail(z):
    """Psi(z) = 1 - Phi(z), without cancellation for z > 0."""
    a = _checked(z)
    u = np.abs(a)
    up = _upper(u)
    return _out(np.where(a >= 0, up, 1.0 - up), z)


def normal_cdf(z):
    """Phi(z), the standard normal cumulative distribution function."""
    a = _checked(z)
    u = np.abs(a)
    up = _upper(u)
    return _out(np.where(a >= 0, 1.0 - up, up), z)


def log_normal_tail(z):
    """log Psi(z)."""
    a = _checked(z)
    u = np.abs(a)
    with np.errstate(divide="ignore"):
        res = np.where(a >= 0, _log_upper(u), np.log1p(-_upper(u)))
    return _out(res, z)


def log_normal_cdf(z):
    """log Phi(z): ``log1p(-Psi(z))`` for z >= 0, the log-tail for z < 0."""
    a = _checked(z)
    u = np.abs(a)
    with np.errstate(divide="ignore"):
        res = np.where(a >= 0, np.log1p(-_upper(u)), _log_upper(u))
    return _out(res, z)


def n_log_normal_cdf(n, z):
    """``n * log Phi(z)`` for huge ``n``.

    For z > 0 the product is evaluated as ``-exp(log n + log Psi(z))`` times the
    series of ``-log1p(-Psi)/Psi``, so it stays accurate when ``Psi(z)`` itself
    would be subnormal.
    """
    a = _checked(z)
    n = float(n)
    u = np.abs(a)
    lt = _log_upper(u)
    psi = np.exp(lt)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        small = -np.exp(math.log(n) + lt) * (1.0 + psi * (0.5 + psi * (1.0 / 3.0 + 0.25 * psi)))
        big = n * np.log1p(-psi)
        pos = np.where(psi < 1e-4, small, big)
        neg = n * lt
    return _out(np.where(a > 0, pos, neg), z)


def normal_quantile(p, complementary: bool = False):
    """Inverse of the standard normal CDF.

    With ``complementary=True`` the argument is the upper-tail probability
    ``q = 1 - p`` and the result solves ``Psi(z) = q``; this keeps full precision
    for ``q`` down to the smallest normal double.

    A rational initial guess is polished by two Halley steps on the tail
    equation.
    """
    a = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a <= 0.0) or np.any(a >= 1.0):
        raise ValueError("normal_quantile requires probabilities strictly inside (0, 1)")
    # Reduce to Psi(u) = q with q <= 1/2, result = sign * u.
    if complementary:
        q = np.where(a <= 0.5, a, 1.0 - a)
        sign = np.where(a <= 0.5, 1.0, -1.0)
    else:
        q = np.where(a <= 0.5, a, 1.0 - a)
        sign = np.where(a <= 0.5, -1.0, 1.0)
    u = -ndtri(q)
    logq = np.log(q)
    for _ in range(2):
        mills = _SQRT_HALF_PI * erfcx(u * _SQRT_HALF)
        with np.errstate(over="ignore", invalid="ignore"):
            lt = np.where(u >= 0, _log_upper(np.abs(u)), np.log1p(-_upper(np.abs(u))))
            e = mills * -np.expm1(logq - lt)
            step = e / (1.0 - 0.5 * e * u)
        u = np.where(np.isfinite(step), u + step, u)
    res = sign * u
    return _out(res, p)


@dataclass(frozen=True)
class GumbelWeightedIntegrand:
    """``P(x) exp(-(k+1)x - exp(-x))`` with P given by ascending coefficients."""

    k: int
    poly: tuple[float, ...] = field(default=(1.0,))

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ValueError("k must be a nonnegative integer")
        object.__setattr__(self, "poly", tuple(float(c) for c in self.poly))
        if len(self.poly) == 0:
            raise ValueError("poly must have at least one coefficient")
        if len(self.poly) - 1 > 8:
            raise ValueError("polynomial degree must not exceed 8")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return npoly.polyval(x, self.poly) * np.exp(-(self.k + 1) * x - np.exp(-x))


def gumbel_weighted_integral(g: GumbelWeightedIntegrand, epsabs: float = 1e-13) -> float:
    """Integral of ``g`` over the real line, in the variable ``u = exp(-x)``.

    The substitution turns the integral into ``int_0^inf u^k e^-u P(-log u) du``
    which is split at ``u = 1``.
    """
    k, coeffs = g.k, g.poly

    def integrand(u: float) -> float:
        if u == 0.0:
            return 0.0 if k > 0 else float("nan")
        return u**k * math.exp(-u) * float(npoly.polyval(-math.log(u), coeffs))

    total = 0.0
    err = 0.0
    # Integrable log singularity at 0 is handled by the extrapolating quadrature;
    # the extra knots keep the subdivision budget small.
    for lo, hi, pts in ((0.0, 1.0, (1e-12, 1e-6, 1e-3)), (1.0, 200.0, (10.0, 40.0))):
        try:
            v, e, _ = integrate(integrand, lo, hi, points=pts, epsabs=epsabs, epsrel=1e-14)
        except QuadratureError as exc:
            raise QuadratureError("Gumbel-weighted integral failed", exc.estimate, exc.error) from exc
        total += v
        err += e
    return total


def exp_integral_at_minus_one() -> float:
    """Ei(-1) = -E1(1), from the convergent power series of Ei."""
    s = 0.0
    term = 1.0
    for j in range(1, 40):
        term *= -1.0 / j
        s += term / j
    return EULER_GAMMA + s
