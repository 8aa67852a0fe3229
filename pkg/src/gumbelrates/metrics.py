"""Probability distances between the law of ``Y_n`` and the standard Gumbel law.

Conventions: total variation is the L1 distance between densities (range
``[0, 2]``, twice the sup-over-events form); the Kullback-Leibler divergence
uses natural logarithms; the Fisher information distance is
``int |(sqrt(f/g))'|^2 g = 1/4 int (d/dx log(f/g))^2 f``.

Integrals run over a finite truncation ``[lo, hi]``. Tail contributions of
the Berry-Esseen, W1 and TV computations are bounded rigorously: the CDFs,
survival functions and densities involved are all log-concave, so e.g.
``int_{-inf}^{lo} F <= F(lo)^2 / f(lo)``. For KL and Fisher the tail is
estimated from the local exponential decay rate of the integrand at the cut.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from ._numerics import grid_then_golden, integrate, sign_change_roots
from .exact_law import GumbelLaw, MaxLaw
from .norming import window_of

__all__ = [
    "KLRoute",
    "MetricKind",
    "MetricResult",
    "QuadratureConfig",
    "berry_esseen",
    "compute_metric",
    "expectation",
    "fisher",
    "kl",
    "tv",
    "w1",
]


class MetricKind(str, enum.Enum):
    BE = "be"
    W1 = "w1"
    TV = "tv"
    KL = "kl"
    FISHER = "fisher"

    @classmethod
    def parse(cls, value) -> "MetricKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"berryesseen": "be", "berry_esseen": "be", "ks": "be", "total_variation": "tv"}
        return cls(aliases.get(key, key))


class KLRoute(str, enum.Enum):
    DIRECT = "direct"
    DECOMPOSED = "decomposed"
    BOTH = "both"


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and truncation for every integral.

    ``trunc_lo``/``trunc_hi`` default to ``-max(5, 2 log log n)`` and
    ``max(40, 3 (log n)^(1/4))``.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    trunc_lo: Optional[float] = None
    trunc_hi: Optional[float] = None

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")
        if self.trunc_lo is not None and self.trunc_hi is not None and not self.trunc_lo < self.trunc_hi:
            raise ValueError("trunc_lo must be smaller than trunc_hi")

    def truncation(self, n: float) -> tuple[float, float]:
        L = math.log(n)
        lo = self.trunc_lo if self.trunc_lo is not None else -max(5.0, 2.0 * math.log(max(L, 1.0)))
        hi = self.trunc_hi if self.trunc_hi is not None else max(40.0, 3.0 * L**0.25)
        if not lo < hi:
            raise ValueError("empty truncation interval")
        return lo, hi

    def with_updates(self, **kw) -> "QuadratureConfig":
        return replace(self, **kw)


@dataclass
class MetricResult:
    """A metric value with its error estimate and work counter.

    ``argmax`` is set for the Berry-Esseen distance only. ``extras`` holds
    route-specific diagnostics (e.g. both KL routes and their agreement).
    """

    metric: MetricKind
    value: float
    err_estimate: float
    nodes: int
    argmax: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["metric"] = self.metric.value
        return d


def _default(cfg: Optional[QuadratureConfig]) -> QuadratureConfig:
    return cfg if cfg is not None else QuadratureConfig()


def _cdf_diff(law: MaxLaw, x):
    """``F_n(x) - Lambda(x)``, differenced on the survival side for x > 0."""
    x = np.asarray(x, dtype=float)
    left = law.cdf(x) - GumbelLaw.cdf(x)
    right = GumbelLaw.sf(x) - law.sf(x)
    return np.where(x > 0, right, left)


def _pdf_diff(law: MaxLaw, x):
    x = np.asarray(x, dtype=float)
    return law.pdf(x) - GumbelLaw.pdf(x)


def _breakpoints(law: MaxLaw, lo: float, hi: float, g, npts: int = 801) -> list[float]:
    xs = np.linspace(lo, hi, npts)
    vals = np.asarray(g(xs), dtype=float)
    roots = sign_change_roots(lambda u: float(g(np.array([u]))[0]), xs, vals)
    pts = list(roots)
    if law.n >= 16:
        w = window_of(law.n)
        pts += [w.lo, w.hi]
    pts += [0.0, 1.0, 2.0, 4.0, 8.0]
    return pts


def _logconcave_tails(law: MaxLaw, lo: float, hi: float) -> tuple[float, float]:
    """Upper bounds on ``int F`` below ``lo`` and ``int (1-F)`` above ``hi``
    for both laws, plus the raw tail masses."""
    fl, fh = float(law.pdf(lo)), float(law.pdf(hi))
    Fl, Sh = float(law.cdf(lo)), float(law.sf(hi))
    gl, gh = float(GumbelLaw.pdf(lo)), float(GumbelLaw.pdf(hi))
    Gl, GSh = float(GumbelLaw.cdf(lo)), float(GumbelLaw.sf(hi))

    def ratio(num, den):
        return num * num / den if den > 0 else (0.0 if num == 0 else math.inf)

    integral = ratio(Fl, fl) + ratio(Gl, gl) + ratio(Sh, fh) + ratio(GSh, gh)
    mass = Fl + Gl + Sh + GSh
    return integral, mass


def _decay_tail(g, edge: float, outward: float, h: float = 1e-3) -> float:
    """Estimate ``int |g|`` beyond ``edge`` from the local exponential decay rate."""
    g0 = abs(float(g(edge)))
    if g0 == 0.0 or not math.isfinite(g0):
        return 0.0 if g0 == 0.0 else math.inf
    g1 = abs(float(g(edge + outward * h)))
    if g1 == 0.0:
        return g0 * h
    rate = (math.log(g0) - math.log(g1)) / h
    return g0 / rate if rate > 0 else math.inf


def _quad(f, lo, hi, pts, cfg: QuadratureConfig):
    return integrate(f, lo, hi, points=pts, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                     limit=cfg.max_subdivisions)


def berry_esseen(law: MaxLaw, cfg: Optional[QuadratureConfig] = None) -> MetricResult:
    """``sup_x |F_n(x) - Lambda(x)|`` by a 2001-point grid and golden-section refinement."""
    cfg = _default(cfg)
    lo, hi = cfg.truncation(law.n)
    x, val, evals, _, _ = grid_then_golden(lambda u: np.abs(_cdf_diff(law, u)), lo, hi, 2001, 1e-10)
    # Outside [lo, hi] both CDFs sit between 0 and their edge values.
    tail_sup = max(float(law.cdf(lo)), float(GumbelLaw.cdf(lo)),
                   float(law.sf(hi)), float(GumbelLaw.sf(hi)))
    err = max(0.0, tail_sup - val) + 4.0 * np.finfo(float).eps
    return MetricResult(MetricKind.BE, float(val), float(err), int(evals), argmax=float(x))


def w1(law: MaxLaw, cfg: Optional[QuadratureConfig] = None) -> MetricResult:
    """``int |F_n - Lambda| dx``, split at the crossings of the two CDFs."""
    cfg = _default(cfg)
    lo, hi = cfg.truncation(law.n)
    pts = _breakpoints(law, lo, hi, lambda u: _cdf_diff(law, u))
    val, err, nev = _quad(lambda u: abs(float(_cdf_diff(law, u))), lo, hi, pts, cfg)
    tail, _ = _logconcave_tails(law, lo, hi)
    return MetricResult(MetricKind.W1, val, err + tail, nev)


def tv(law: MaxLaw, cfg: Optional[QuadratureConfig] = None) -> MetricResult:
    """``int |f_n - lambda| dx`` (L1 convention, at most 2), split at density crossings."""
    cfg = _default(cfg)
    lo, hi = cfg.truncation(law.n)
    pts = _breakpoints(law, lo, hi, lambda u: law.log_ratio(u))
    val, err, nev = _quad(lambda u: abs(float(_pdf_diff(law, u))), lo, hi, pts, cfg)
    _, mass = _logconcave_tails(law, lo, hi)
    return MetricResult(MetricKind.TV, val, err + mass, nev, extras={"crossings": [p for p in pts]})


def _kl_direct(law: MaxLaw, cfg: QuadratureConfig, lo, hi, pts):
    def g(u):
        p = float(law.pdf(u))
        return 0.0 if p == 0.0 else p * float(law.log_ratio(u))

    val, err, nev = _quad(g, lo, hi, pts, cfg)
    tail = _decay_tail(g, lo, -1.0) + _decay_tail(g, hi, 1.0)
    return val, err + tail, nev


def _kl_decomposed(law: MaxLaw, cfg: QuadratureConfig, lo, hi, pts):
    # KL = E[e^-Y - q(Y)] - (n-1)/n, using E[(n-1) log Phi(X_(n))] = -(n-1)/n.
    # Integrate f (e^-Y - 1 - q) and add the exact mass F(hi) - F(lo) so the
    # O(1) parts cancel analytically.
    q = law.scheme.q

    def g(u):
        p = float(law.pdf(u))
        return 0.0 if p == 0.0 else p * (math.expm1(-u) - float(q(u)))

    val, err, nev = _quad(g, lo, hi, pts, cfg)
    mass = float(law.cdf(hi)) - float(law.cdf(lo))
    n = law.n
    res = val + (mass - 1.0) + 1.0 / n
    tail = _decay_tail(g, lo, -1.0) + _decay_tail(g, hi, 1.0)
    return res, err + tail, nev


def kl(
    law: MaxLaw, cfg: Optional[QuadratureConfig] = None, route=KLRoute.DIRECT
) -> MetricResult:
    """Kullback-Leibler divergence ``int f_n log(f_n/lambda)`` (natural log).

    ``DIRECT`` integrates ``f_n`` times the exact log-ratio. ``DECOMPOSED`` uses
    ``E[exp(-Y) - q(Y)] - (n-1)/n``, which follows from the closed form of the
    log-ratio and ``E log Phi(X_(n)) = -1/n``. ``BOTH`` returns the direct value
    and records both routes and whether they agree within their combined error.
    """
    cfg = _default(cfg)
    route = KLRoute(route)
    lo, hi = cfg.truncation(law.n)
    pts = _breakpoints(law, lo, hi, lambda u: law.log_ratio(u))
    if route is KLRoute.DIRECT:
        v, e, nev = _kl_direct(law, cfg, lo, hi, pts)
        return MetricResult(MetricKind.KL, v, e, nev, extras={"route": "direct"})
    if route is KLRoute.DECOMPOSED:
        v, e, nev = _kl_decomposed(law, cfg, lo, hi, pts)
        return MetricResult(MetricKind.KL, v, e, nev, extras={"route": "decomposed"})
    v1, e1, n1 = _kl_direct(law, cfg, lo, hi, pts)
    v2, e2, n2 = _kl_decomposed(law, cfg, lo, hi, pts)
    gap = abs(v1 - v2)
    agree = gap <= 10.0 * (e1 + e2) + 1e-6 * abs(v1)
    extras = {"route": "both", "direct": v1, "direct_err": e1, "decomposed": v2,
              "decomposed_err": e2, "gap": gap, "agree": bool(agree)}
    return MetricResult(MetricKind.KL, v1, max(e1, gap), n1 + n2, extras=extras)


def fisher(
    law: MaxLaw, cfg: Optional[QuadratureConfig] = None, score: str = "analytic", fd_step: float = 1e-5
) -> MetricResult:
    """Fisher information distance ``1/4 int score^2 f_n``.

    ``score="fd"`` swaps the analytic score for a central finite difference of
    the exact log-ratio (a check on the analytic route).
    """
    cfg = _default(cfg)
    lo, hi = cfg.truncation(law.n)
    if score == "analytic":
        sc = law.score_ratio
    elif score == "fd":
        def sc(u):
            return (float(law.log_ratio(u + fd_step)) - float(law.log_ratio(u - fd_step))) / (2 * fd_step)
    else:
        raise ValueError("score must be 'analytic' or 'fd'")

    def g(u):
        p = float(law.pdf(u))
        if p == 0.0:
            return 0.0
        s = float(sc(u))
        return 0.25 * p * s * s

    pts = _breakpoints(law, lo, hi, lambda u: law.score_ratio(u))
    val, err, nev = _quad(g, lo, hi, pts, cfg)
    tail = _decay_tail(g, lo, -1.0) + _decay_tail(g, hi, 1.0)
    return MetricResult(MetricKind.FISHER, val, err + tail, nev, extras={"score": score})


def compute_metric(metric, law: MaxLaw, cfg: Optional[QuadratureConfig] = None, **kw) -> MetricResult:
    metric = MetricKind.parse(metric)
    fn = {MetricKind.BE: berry_esseen, MetricKind.W1: w1, MetricKind.TV: tv,
          MetricKind.KL: kl, MetricKind.FISHER: fisher}[metric]
    return fn(law, cfg, **kw)


def expectation(law: MaxLaw, g, cfg: Optional[QuadratureConfig] = None) -> float:
    """``E[g(Y_n)]`` by quadrature over the truncation interval.

    ``g`` must grow at most polynomially; the truncated tails then carry
    mass far below the quadrature tolerance.
    """
    cfg = _default(cfg)
    lo, hi = cfg.truncation(law.n)
    pts = [0.0, 1.0, 2.0, 4.0, 8.0]
    if law.n >= 16:
        w = window_of(law.n)
        pts += [w.lo, w.hi]

    def integrand(u):
        p = float(law.pdf(u))
        return 0.0 if p == 0.0 else p * float(g(u))

    val, _, _ = _quad(integrand, lo, hi, pts, cfg)
    return val
