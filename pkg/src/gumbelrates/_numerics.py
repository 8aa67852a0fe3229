"""Quadrature, golden-section and bracketing helpers shared by the numerical modules."""
from __future__ import annotations

import math
import warnings
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate as _integrate
from scipy.optimize import brentq

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy.

    ``estimate`` and ``error`` carry the best value and its error estimate so
    callers can still report them.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    points: Iterable[float] = (),
    epsabs: float = 1e-12,
    epsrel: float = 1e-10,
    limit: int = 2000,
    fail_factor: float = 1e3,
) -> tuple[float, float, int]:
    """Integrate ``f`` over [a, b], splitting at every interior breakpoint.

    Returns ``(value, error_estimate, n_evaluations)``. Raises
    :class:`QuadratureError` when the accumulated error estimate exceeds
    ``fail_factor`` times the requested tolerance.
    """
    if not a < b:
        raise ValueError(f"empty integration interval [{a}, {b}]")
    knots = sorted({float(p) for p in points if a < p < b})
    edges = [a, *knots, b]
    total = 0.0
    err = 0.0
    nevals = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", _integrate.IntegrationWarning)
            val, e, info = _integrate.quad(
                f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1
            )[:3]
        total += val
        err += e
        nevals += int(info["neval"])
    tol = max(epsabs, epsrel * abs(total))
    if not math.isfinite(total) or err > fail_factor * tol:
        raise QuadratureError("quadrature did not converge", total, err)
    return total, err, nevals


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, xtol: float = 1e-10
) -> tuple[float, float, int]:
    """Maximize a unimodal ``f`` on [a, b] to x-resolution ``xtol``.

    Returns ``(x, f(x), n_evaluations)``.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= xtol:
        x = 0.5 * (a + b)
        return x, f(x), 1
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    evals = 2
    while h > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            h = INV_PHI * h
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = INV_PHI * h
            d = a + INV_PHI * h
            fd = f(d)
        evals += 1
    if fc > fd:
        return c, fc, evals
    return d, fd, evals


def grid_then_golden(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    npts: int = 2001,
    xtol: float = 1e-10,
) -> tuple[float, float, int, np.ndarray, np.ndarray]:
    """Locate the global maximum of a vectorized ``f`` on a grid, then refine.

    The refinement brackets the best grid point by its two neighbours.
    Returns ``(x, f(x), evals, grid, grid_values)``.
    """
    xs = np.linspace(lo, hi, npts)
    vals = np.asarray(f(xs), dtype=float)
    i = int(np.nanargmax(vals))
    left = xs[max(i - 1, 0)]
    right = xs[min(i + 1, npts - 1)]
    x, fx, ev = golden_section_max(lambda u: float(f(np.array([u]))[0]), left, right, xtol)
    if vals[i] > fx:
        x, fx = float(xs[i]), float(vals[i])
    return x, fx, npts + ev, xs, vals


def sign_change_roots(
    g: Callable[[float], float], xs: Sequence[float], values: Sequence[float] | None = None
) -> list[float]:
    """Roots of ``g`` bracketed by sign changes along the grid ``xs``."""
    if values is None:
        values = [g(float(x)) for x in xs]
    roots = []
    for x0, x1, v0, v1 in zip(xs[:-1], xs[1:], values[:-1], values[1:]):
        if not (math.isfinite(v0) and math.isfinite(v1)):
            continue
        if v0 == 0.0:
            roots.append(float(x0))
        elif v0 * v1 < 0.0:
            roots.append(brentq(g, float(x0), float(x1), xtol=1e-14, rtol=4 * np.finfo(float).eps))
    return roots
