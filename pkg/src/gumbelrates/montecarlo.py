"""Monte Carlo cross-checks of the analytic pipeline.

Maxima are drawn exactly by inversion: for ``U ~ U(0, 1)`` the upper-tail
probability ``p = 1 - U^(1/n) = -expm1(log U / n)`` is fed to the complementary
normal quantile, so one draw costs one quantile call regardless of ``n``.

Random streams are split into fixed-size blocks; block ``j`` uses a Philox
generator seeded by ``SeedSequence(seed, spawn_key=(j,))``. The stream is
therefore identical for any number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.special import exp1
from scipy.stats import kstwobign

from .exact_law import GumbelLaw, MaxLaw
from .norming import SchemeKind, make_scheme
from .special_fn import EULER_GAMMA, normal_quantile

__all__ = [
    "BLOCK_SIZE",
    "KOLMOGOROV_MEAN",
    "KOLMOGOROV_SD",
    "BootstrapResult",
    "SimConfig",
    "bootstrap_w1",
    "empirical_ks",
    "empirical_w1",
    "gumbel_ein",
    "ks_against_analytic",
    "sample_max",
]

BLOCK_SIZE = 1 << 16
KOLMOGOROV_MEAN = float(kstwobign.mean())
KOLMOGOROV_SD = float(kstwobign.std())


@dataclass(frozen=True)
class SimConfig:
    """Sample-maximum size ``n``, replicate count ``m`` and a 64-bit seed."""

    n: int
    m: int
    seed: int = 0
    scheme: SchemeKind = SchemeKind.CLASSICAL

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError("n must be an integer >= 3")
        if int(self.m) != self.m or self.m < 100:
            raise ValueError("m must be an integer >= 100")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "scheme", SchemeKind.parse(self.scheme))


def _block_uniforms(seed: int, block: int, size: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    u = np.random.Generator(np.random.Philox(ss)).random(size)
    # random() is on [0, 1); exclude an exact zero.
    return np.where(u == 0.0, np.nextafter(0.0, 1.0), u)


def _draw_block(cfg: SimConfig, block: int, normalize: bool) -> np.ndarray:
    size = min(BLOCK_SIZE, cfg.m - block * BLOCK_SIZE)
    u = _block_uniforms(cfg.seed, block, size)
    p = -np.expm1(np.log(u) / cfg.n)
    x = normal_quantile(p, complementary=True)
    if not normalize:
        return x
    s = make_scheme(cfg.scheme, cfg.n)
    return s.a * (x - s.b)


def sample_max(cfg: SimConfig, normalize: bool = True, jobs: int = 1) -> np.ndarray:
    """``m`` draws of ``Y_n = a (X_(n) - b)`` (or of ``X_(n)`` if ``normalize=False``)."""
    nblocks = -(-cfg.m // BLOCK_SIZE)
    blocks = range(nblocks)
    if jobs > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda j: _draw_block(cfg, j, normalize), blocks))
    else:
        parts = [_draw_block(cfg, j, normalize) for j in blocks]
    return np.concatenate(parts)


def _require_sorted(samples) -> np.ndarray:
    xs = np.asarray(samples, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise ValueError("samples must be a non-empty 1-d array")
    if np.any(np.diff(xs) < 0):
        raise ValueError("samples must be sorted ascending")
    return xs


CdfLike = Union[str, MaxLaw, Callable]


def _cdf_of(law: CdfLike) -> Callable:
    if isinstance(law, str):
        if law.lower() != "gumbel":
            raise ValueError("law must be 'gumbel', a MaxLaw or a CDF callable")
        return GumbelLaw.cdf
    if isinstance(law, MaxLaw):
        return law.cdf
    return law


def empirical_ks(samples, law: CdfLike = "gumbel") -> float:
    """One-sample Kolmogorov-Smirnov statistic of sorted ``samples`` against ``law``."""
    xs = _require_sorted(samples)
    m = xs.size
    F = np.asarray(_cdf_of(law)(xs), dtype=float)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - F), np.max(F - (i - 1) / m)))


def gumbel_ein(z):
    """``Ein(z) = int_0^z (1 - e^-t)/t dt``; ``Ein(e^-x) = int_x^inf (1 - Lambda)``."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 1.0
    zs = z[small]
    term = zs.copy()
    acc = zs.copy()
    for k in range(2, 30):
        term = -term * zs / k
        acc += term / k
    out[small] = acc
    zl = z[~small]
    out[~small] = exp1(zl) + EULER_GAMMA + np.log(zl)
    return out


_K0_LEFT = float(exp1(1.0))        # int_{-inf}^0 Lambda
_K0_RIGHT = float(gumbel_ein(np.array([1.0]))[0])  # int_0^inf (1 - Lambda)


def _lambda_antiderivative(x: np.ndarray) -> np.ndarray:
    """``K(x) = int_0^x Lambda``; from ``E1(e^-x)`` on the left, ``Ein(e^-x)`` on the right."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    neg = x <= 0
    with np.errstate(over="ignore"):
        out[neg] = exp1(np.exp(-x[neg])) - _K0_LEFT
    pos = ~neg
    out[pos] = x[pos] - _K0_RIGHT + gumbel_ein(np.exp(-x[pos]))
    return out


def _w1_from_levels(xs, K, levels) -> float:
    # Segment j spans [x_j, x_{j+1}] with F_emp = levels[j]; split at the point
    # where Lambda crosses that level if it falls inside the segment.
    u, v = xs[:-1], xs[1:]
    p = levels[:-1]
    Ku, Kv = K[:-1], K[1:]
    inner = (p > 0) & (p < 1)
    q = np.full_like(p, -np.inf)
    q[inner] = -np.log(-np.log(p[inner]))
    q = np.where(p >= 1, np.inf, q)
    split = (q > u) & (q < v)
    Kq = np.zeros_like(p)
    if np.any(split):
        Kq[split] = _lambda_antiderivative(q[split])
    whole = np.abs(Kv - Ku - p * (v - u))
    left = np.abs(Kq - Ku - p * (q - u))
    right = np.abs(Kv - Kq - p * (v - q))
    seg = np.where(split, left + right, whole)
    tails = float(exp1(np.exp(-xs[0])) if xs[0] > -700 else 0.0)
    tails += float(gumbel_ein(np.exp(-xs[-1:]))[0])
    return float(np.sum(seg) + tails)


def empirical_w1(samples) -> float:
    """``int |F_emp - Lambda| dx`` for sorted ``samples``, in closed form.

    Between consecutive order statistics the empirical CDF is constant, so each
    piece is a difference of the Gumbel CDF's antiderivative, split where
    ``Lambda`` crosses the empirical level.
    """
    xs = _require_sorted(samples)
    m = xs.size
    K = _lambda_antiderivative(xs)
    levels = np.arange(1, m + 1) / m
    return _w1_from_levels(xs, K, levels)


@dataclass(frozen=True)
class BootstrapResult:
    value: float
    se: float
    replicates: np.ndarray


def bootstrap_w1(samples, resamples: int = 200, seed: int = 0) -> BootstrapResult:
    """Empirical W1 with a nonparametric bootstrap standard error.

    Resamples are multinomial counts on the sorted sample, so no re-sorting is
    needed; resample ``r`` uses the Philox stream with spawn key ``(r,)``.
    """
    xs = _require_sorted(samples)
    m = xs.size
    K = _lambda_antiderivative(xs)
    base = _w1_from_levels(xs, K, np.arange(1, m + 1) / m)
    reps = np.empty(resamples)
    probs = np.full(m, 1.0 / m)
    for r in range(resamples):
        ss = np.random.SeedSequence(seed, spawn_key=(2**32 + r,))
        counts = np.random.Generator(np.random.Philox(ss)).multinomial(m, probs)
        levels = np.cumsum(counts) / m
        levels[-1] = 1.0
        reps[r] = _w1_with_weights(xs, K, counts, levels)
    return BootstrapResult(base, float(np.std(reps, ddof=1)), reps)


def _w1_with_weights(xs, K, counts, levels) -> float:
    # Drop order statistics that received no weight; the empirical CDF only
    # jumps at the retained ones.
    keep = counts > 0
    return _w1_from_levels(xs[keep], K[keep], levels[keep])


def ks_against_analytic(samples, law: MaxLaw, be_value: float) -> dict:
    """Bracket the empirical KS distance to Gumbel around the analytic sup-distance.

    By the triangle inequality ``|KS_gumbel - BE| <= KS_exact`` where
    ``KS_exact`` is the sample's distance to its own law. ``KS_exact sqrt(m)``
    is asymptotically Kolmogorov distributed, giving the 3-sigma level
    ``(mean + 3 sd)/sqrt(m)``.
    """
    xs = _require_sorted(samples)
    m = xs.size
    ks_g = empirical_ks(xs, "gumbel")
    ks_e = empirical_ks(xs, law)
    level = (KOLMOGOROV_MEAN + 3.0 * KOLMOGOROV_SD) / math.sqrt(m)
    gap = abs(ks_g - be_value)
    return {
        "ks_gumbel": ks_g,
        "ks_exact": ks_e,
        "be": be_value,
        "gap": gap,
        "three_sigma": level,
        "null_ok": ks_e <= level,
        "bracket_ok": gap <= level,
    }
