import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gumbelrates._numerics import integrate
from gumbelrates.exact_law import GumbelLaw, MaxLaw, expected_log_phi_identity, max_law
from gumbelrates.norming import SchemeKind, window_of

mpmath.mp.prec = 200
SCHEMES = list(SchemeKind)


def mp_power_cdf(n, z):
    """Phi(z)^n at 200-bit precision (the extended-precision oracle)."""
    phi = 1 - mpmath.erfc(mpmath.mpf(z) / mpmath.sqrt(2)) / 2
    return mpmath.power(phi, mpmath.mpf(n))


@pytest.mark.parametrize("kind", SCHEMES)
@pytest.mark.parametrize("n", [1e4, 1e8, 1e16])
@pytest.mark.parametrize("x", [-1.5, 0.0, 1.0, 4.0])
def test_cdf_against_extended_precision(kind, n, x):
    law = max_law(kind, n)
    z = law.scheme.b + x / law.scheme.a
    assert law.cdf(x) == pytest.approx(float(mp_power_cdf(n, z)), rel=1e-12)


def test_classical_cdf_at_zero_near_expansion():
    law = max_law("classical", 1e8)
    t = -law.scheme.c
    pred = math.exp(-1.0) * (1 + (t * t + 2 * t + 2) / (4 * law.scheme.log_n))
    assert law.cdf(0.0) == pytest.approx(pred, rel=1e-2)


def test_tails():
    law = max_law("classical", 1e6)
    assert law.cdf(-20.0) < 1e-15
    assert law.cdf(50.0) > 1 - 1e-15
    assert law.sf(50.0) > 0
    # Deep left tail: log-CDF stays finite and huge-negative; pdf underflows to 0 cleanly.
    lc = law.log_cdf(-200.0)
    assert math.isfinite(lc) and lc < -1e8
    assert law.pdf(-200.0) == 0.0
    assert not math.isnan(law.log_ratio(-200.0))


@pytest.mark.parametrize("kind", SCHEMES)
@pytest.mark.parametrize("n", [1e4, 1e6, 1e8, 1e12, 1e16])
def test_grid_invariants(kind, n):
    law = max_law(kind, n)
    xs = np.linspace(-6, 30, 1000)
    F = law.cdf(xs)
    assert np.all(np.diff(F) >= 0)
    assert np.all(law.pdf(xs) >= 0)
    mass, _, _ = integrate(lambda u: float(law.pdf(u)), -12, 80, points=(0, 2, 5, 10))
    assert abs(mass - 1) <= 1e-9


@pytest.mark.parametrize("kind", SCHEMES)
def test_pdf_is_derivative_of_cdf(kind):
    law = max_law(kind, 1e6)
    h = 1e-5
    for x in (-0.5, 0.0, 1.0, 2.0):
        fd = (law.cdf(x + h) - law.cdf(x - h)) / (2 * h)
        assert law.pdf(x) == pytest.approx(fd, rel=1e-6)


def test_weak_convergence_sorted():
    xs = np.linspace(-5, 20, 2001)
    dists = [np.max(np.abs(max_law("classical", n).cdf(xs) - GumbelLaw.cdf(xs))) for n in (1e4, 1e6, 1e8, 1e12, 1e16)]
    assert dists == sorted(dists, reverse=True)


@pytest.mark.parametrize("kind", SCHEMES)
def test_score_matches_finite_difference(kind):
    law = max_law(kind, 1e6)
    w = window_of(1e6)
    xs = np.linspace(w.lo, w.hi, 50)
    h = 1e-5
    fd = (law.log_ratio(xs + h) - law.log_ratio(xs - h)) / (2 * h)
    assert np.max(np.abs(law.score_ratio(xs) - fd) / np.abs(law.score_ratio(xs))) <= 1e-6


def test_score_two_forms_agree_and_shrink():
    for kind in SCHEMES:
        law = max_law(kind, 1e6)
        xs = np.linspace(-0.5, 3, 30)
        a, d = law.score_ratio(xs), law.score_ratio_direct(xs)
        # The direct form cancels two O(1) terms; compare at its own precision.
        assert np.all(np.abs(a - d) <= 1e-12 * (np.exp(-xs) + 1))
    # |score(0)| ~ c(c-2)/(4 log n) rises until n ~ 1e10, then decays.
    scores = [abs(max_law("classical", n).score_ratio(0.0)) for n in (1e12, 1e16, 1e32, 1e64, 1e128)]
    assert scores == sorted(scores, reverse=True)


def test_h_expm1_route_vs_naive():
    law = max_law("classical", 1e6)
    s = law.scheme
    for x in np.linspace(-0.6, 1.9, 20):
        naive = (1 - 1 / s.n) * math.exp(-float(s.q(x))) / float(mpmath.ncdf(float(s.z(x)))) - 1
        # The naive form keeps >= 6 significant digits here.
        assert law.h(x) == pytest.approx(naive, rel=1e-6)


def test_log_ratio_formula():
    law = max_law("hall", 1e8)
    for x in (-1.0, 0.5, 3.0):
        assert law.log_ratio(x) == pytest.approx(law.log_pdf(x) - GumbelLaw.log_pdf(x), abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 10), st.floats(-3, 10), st.sampled_from(SCHEMES), st.floats(2.0, 300.0))
def test_cdf_monotone_random_pairs(x1, x2, kind, log10n):
    law = max_law(kind, 10.0**log10n)
    lo, hi = min(x1, x2), max(x1, x2)
    assert law.cdf(lo) <= law.cdf(hi)


def test_gumbel_law_moments():
    m, _, _ = integrate(lambda u: u * GumbelLaw.pdf(u), -10, 60, points=(0, 5))
    v, _, _ = integrate(lambda u: (u - m) ** 2 * GumbelLaw.pdf(u), -10, 60, points=(0, 5))
    assert m == pytest.approx(GumbelLaw.mean, abs=1e-12)
    assert v == pytest.approx(GumbelLaw.variance, abs=1e-11)
    assert GumbelLaw.ppf(GumbelLaw.cdf(1.3)) == pytest.approx(1.3, rel=1e-14)


@pytest.mark.parametrize("n,tol", [(3.0, 1e-12), (10.0, 1e-14), (1e3, 1e-15), (1e6, 1e-16), (1e12, 1e-22), (1e100, 1e-110)])
def test_expected_log_phi_identity(n, tol):
    assert abs(expected_log_phi_identity(n) + 1 / n) <= tol


def test_identity_rejects_small_n():
    with pytest.raises(ValueError):
        expected_log_phi_identity(2.0)


def test_non_finite_rejected():
    law = max_law("classical", 1e6)
    with pytest.raises(ValueError):
        law.cdf(float("nan"))
    with pytest.raises(ValueError):
        law.log_pdf(float("inf"))
    assert isinstance(law, MaxLaw) and law.n == 1e6
