"""Norming schemes ``(a_n, b_n)`` for the maximum of ``n`` standard Gaussians.

Three schemes are supported:

``CLASSICAL``
    ``a = sqrt(2 log n)``, ``b = a - c/a`` with ``c = log(sqrt(2 pi) a)``.
``HALL``
    ``b`` solves ``2 pi b^2 exp(b^2) = n^2`` and the scale equals ``b``.
``SECOND_ORDER``
    ``a = sqrt(2 log n)``, ``b = a - c/a - (c^2 - 2c)/(2 a^3)``.

For every scheme the normalized maximum is ``Y = scale * (X - b)`` so
``P(Y <= x) = Phi(b + x/scale)^n``. The density of ``Y`` is written
``exp(-x - q(x)) * Phi(z(x))^(n-1)``; ``q`` is the scheme's exact quadratic
exponent, evaluated without the ``log n - z^2/2`` cancellation.

``n`` is a positive real throughout: only ``log n`` enters.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "ExpansionWindow",
    "NormingScheme",
    "SchemeKind",
    "hall_residual",
    "make_scheme",
    "t_of",
    "window_of",
]

N_MIN = 3.0
N_MAX = 1e300
WINDOW_N_MIN = 16.0


class SchemeKind(str, enum.Enum):
    CLASSICAL = "classical"
    HALL = "hall"
    SECOND_ORDER = "second"

    @classmethod
    def parse(cls, value) -> "SchemeKind":
        if isinstance(value, cls):
            return value
        aliases = {"hallroot": "hall", "secondorder": "second", "second_order": "second"}
        key = str(value).strip().lower()
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class NormingScheme:
    """An immutable ``(scale, centering)`` pair with derived quantities.

    ``a`` is the scale and ``b`` the centering constant; for the Hall scheme
    ``a == b``. ``c`` is ``log(sqrt(2 pi) sqrt(2 log n))`` for the classical and
    second-order schemes and ``None`` for Hall.
    """

    kind: SchemeKind
    n: float
    a: float
    b: float
    c: Optional[float]

    @property
    def log_n(self) -> float:
        return math.log(self.n)

    @property
    def shift(self) -> float:
        """Extra centering offset of the second-order scheme, 0 otherwise."""
        if self.kind is SchemeKind.SECOND_ORDER:
            c, a = self.c, self.a
            return (c * c - 2.0 * c) / (2.0 * a**3)
        return 0.0

    def z(self, x):
        """Gaussian argument ``b + x/a`` at which ``Phi`` is raised to the power n."""
        if self.kind is SchemeKind.HALL:
            return self.b + np.asarray(x, dtype=float) / self.b
        # a + t/a - shift; same as b + x/a but with no cancellation in b.
        t = np.asarray(x, dtype=float) - self.c
        return self.a + t / self.a - self.shift

    def q(self, x):
        """Exact quadratic exponent: ``log f_n(x) = -x - q(x) + (n-1) log Phi(z(x))``."""
        x = np.asarray(x, dtype=float)
        if self.kind is SchemeKind.HALL:
            return x * x / (2.0 * self.b * self.b)
        t = x - self.c
        L = self.log_n
        base = t * t / (4.0 * L)
        if self.kind is SchemeKind.CLASSICAL:
            return base
        d = self.shift
        return base - d * (self.a + t / self.a) + 0.5 * d * d

    def dq(self, x):
        """Derivative of :meth:`q`."""
        x = np.asarray(x, dtype=float)
        if self.kind is SchemeKind.HALL:
            return x / (self.b * self.b)
        t = x - self.c
        base = t / (2.0 * self.log_n)
        if self.kind is SchemeKind.CLASSICAL:
            return base
        return base - self.shift / self.a

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "n": self.n, "a": self.a, "b": self.b, "c": self.c}


@dataclass(frozen=True)
class ExpansionWindow:
    """Interval ``[-log(log n)/4, (log n)^(1/4)]`` where the finite-n expansions hold."""

    lo: float
    hi: float

    def __contains__(self, x) -> bool:
        return bool(self.lo <= x <= self.hi)


def hall_residual(b: float, n: float) -> float:
    """``2 log b + b^2 - 2 log n + log(2 pi)``; zero at the Hall centering."""
    return 2.0 * math.log(b) + b * b - 2.0 * math.log(n) + math.log(2.0 * math.pi)


def _solve_hall(n: float, b0: float, maxiter: int = 100) -> float:
    # Newton on g(s) = log s + s - 2 log n + log 2pi in s = b^2, which never
    # forms exp(b^2). g is increasing and concave, so the bracket shrinks
    # monotonically and bisection takes over if a step leaves it.
    target = 2.0 * math.log(n) - math.log(2.0 * math.pi)
    lo, hi = 1e-300, max(target, 1.0) + 1.0

    def g(s: float) -> float:
        return math.log(s) + s - target

    s = min(max(b0 * b0, lo), hi)
    for _ in range(maxiter):
        gs = g(s)
        if gs > 0:
            hi = s
        else:
            lo = s
        step = gs / (1.0 / s + 1.0)
        s_new = s - step
        if not lo < s_new < hi:
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= 1e-16 * s:
            return math.sqrt(s_new)
        s = s_new
    raise RuntimeError(f"Hall centering: Newton failed to converge for n={n!r}")


def make_scheme(kind, n: float) -> NormingScheme:
    """Build the norming scheme of the given kind for (real) sample size ``n``."""
    kind = SchemeKind.parse(kind)
    n = float(n)
    if not (math.isfinite(n) and N_MIN <= n <= N_MAX):
        raise ValueError(f"n must lie in [{N_MIN:g}, {N_MAX:g}], got {n!r}")
    L = math.log(n)
    a = math.sqrt(2.0 * L)
    c = 0.5 * math.log(4.0 * math.pi * L)
    if kind is SchemeKind.CLASSICAL:
        return NormingScheme(kind, n, a, a - c / a, c)
    if kind is SchemeKind.SECOND_ORDER:
        b = a - c / a - (c * c - 2.0 * c) / (2.0 * a**3)
        return NormingScheme(kind, n, a, b, c)
    b = _solve_hall(n, a - c / a)
    return NormingScheme(kind, n, b, b, None)


def t_of(scheme: NormingScheme, x):
    """``t_n(x) = x - c_n``; undefined for the Hall scheme."""
    if scheme.kind is SchemeKind.HALL:
        raise ValueError("t_n(x) is not defined for the Hall scheme")
    res = np.asarray(x, dtype=float) - scheme.c
    return float(res) if np.ndim(x) == 0 else res


def window_of(n: float) -> ExpansionWindow:
    n = float(n)
    if not (math.isfinite(n) and n >= WINDOW_N_MIN):
        raise ValueError(f"expansion window requires n >= {WINDOW_N_MIN:g}, got {n!r}")
    L = math.log(n)
    return ExpansionWindow(-0.25 * math.log(L), L**0.25)
