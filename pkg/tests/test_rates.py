import math

import mpmath
import numpy as np
import pytest

from gumbelrates.metrics import MetricKind
from gumbelrates.norming import SchemeKind, make_scheme
from gumbelrates.rates import (
    arbitrate_mean_coefficient,
    compute_constant,
    constant_table,
    finite_n_prediction,
    predict,
    ratio_table,
)
from gumbelrates.special_fn import EULER_GAMMA

mpmath.mp.dps = 20

# lambda(x) < 1e-170 below x = -6, so the oracles integrate over [-6, 60].


def lam(x):
    return mpmath.exp(-x - mpmath.exp(-x))


def test_d1_d2_against_mpmath_root_of_derivative():
    f1 = lambda x: (x * x + 2 * x + 2) * lam(x)
    x1 = mpmath.findroot(lambda x: mpmath.diff(f1, x), 1.0)
    assert compute_constant("d1") == pytest.approx(float(f1(x1)), rel=1e-12)
    f2 = lambda x: x * lam(x)
    x2 = mpmath.findroot(lambda x: mpmath.diff(f2, x), 1.0)
    assert compute_constant("d2") == pytest.approx(float(f2(x2)), rel=1e-12)


def test_d3_d4_d5_against_mpmath():
    g3 = lambda x: lam(x) * abs(-x * x + mpmath.exp(-x) * (x * x + 2 * x + 2))
    roots = [mpmath.findroot(lambda x: -x * x + mpmath.exp(-x) * (x * x + 2 * x + 2), x0) for x0 in (1.0,)]
    ref3 = mpmath.quad(g3, [-6, -2, 0, *roots, 5, 20, 60])
    assert compute_constant("d3") == pytest.approx(float(ref3), rel=1e-10)
    ref4 = mpmath.quad(lambda x: lam(x) * (5 * x**4 - 16 * x**3 - 4 * x * x + 8), [-6, 0, 5, 20, 60])
    assert compute_constant("d4") == pytest.approx(float(ref4), rel=1e-12)
    ref5 = mpmath.quad(lambda x: lam(x) * (mpmath.exp(-x) * x * x - 2 * x) ** 2, [-6, -2, 0, 5, 20, 60])
    assert compute_constant("d5") == pytest.approx(float(ref5), rel=1e-10)


def test_d4_two_routes():
    assert abs(compute_constant("d4") - compute_constant("d4_unreduced")) <= 1e-9


def test_quadratic_form_constants():
    refkl = mpmath.quad(lambda x: lam(x) * (mpmath.exp(-x) * (x * x + 2 * x + 2) - x * x) ** 2, [-6, 0, 5, 20, 60])
    reffi = mpmath.quad(lambda x: lam(x) * (mpmath.exp(-x) * x * x + 2 * x) ** 2, [-6, 0, 5, 20, 60])
    assert compute_constant("kl_hall_quadratic") == pytest.approx(float(refkl), rel=1e-11)
    assert compute_constant("fisher_hall_quadratic") == pytest.approx(float(reffi), rel=1e-11)


def test_w1_constants():
    hall = (6 * (EULER_GAMMA**2 + 2 * EULER_GAMMA + 2) + math.pi**2) / 24
    assert compute_constant("w1_hall") == pytest.approx(hall, rel=1e-13)
    assert compute_constant("w1_second") == pytest.approx(float(mpmath.euler - 2 * mpmath.ei(-1)), abs=1e-13)
    with pytest.raises(KeyError):
        compute_constant("d7")


def test_constant_table_contents():
    names = {r["name"] for r in constant_table()}
    assert {"d1", "d2", "d3", "d4", "d5", "gamma", "Ei(-1)", "w1_second"} <= names
    d4 = next(r for r in constant_table() if r["name"] == "d4")
    assert d4["value"] == pytest.approx(30.777, abs=0.01) and d4["published"] == 30.777


def test_predict_classical_formulas():
    n = 1e8
    L = math.log(n)
    ll = math.log(L)
    assert predict("be", "classical", n).value == ll**2 / (16 * math.e * L)
    assert predict("w1", "classical", n).value * 16 * L == pytest.approx(ll**2, rel=1e-15)
    assert predict("tv", "classical", n).value * 8 * math.e * L == pytest.approx(ll**2, rel=1e-15)
    assert predict("kl", "classical", n).value * 512 * L**2 == pytest.approx(ll**4, rel=1e-15)
    assert predict("fisher", "classical", n).value * 1024 * L**2 == pytest.approx(ll**4, rel=1e-15)


def test_predict_hall_and_second():
    n = 1e12
    L = math.log(n)
    ll = math.log(L)
    assert predict("be", "hall", n).value == pytest.approx(compute_constant("d1") / (4 * L))
    assert predict("w1", "hall", n).value * L == pytest.approx(compute_constant("w1_hall"))
    assert predict("kl", "hall", n).value == pytest.approx(compute_constant("d4") / (32 * L * L))
    assert predict("fisher", "hall", n).value == pytest.approx(compute_constant("d5") / (64 * L * L))
    assert predict("be", "second", n).value == pytest.approx(compute_constant("d2") * ll / (4 * L))
    w = predict("w1", "second", n)
    assert w.value * 4 * L / ll == pytest.approx(1.016, abs=1e-3)
    for m in ("tv", "kl", "fisher"):
        p = predict(m, "second", n)
        assert p.value is None and not p.closed_form and p.constant_name in ("d7", "d8", "d9")
    with pytest.raises(ValueError):
        predict("be", "classical", 10.0)


@pytest.mark.parametrize("kind", list(SchemeKind))
@pytest.mark.parametrize("metric", list(MetricKind))
def test_predict_monotone(kind, metric):
    # (loglog n)^k / (log n)^j decreases once loglog n > 2, i.e. n > e^(e^2) ~ 1618.
    lo = 1e4 if kind is SchemeKind.CLASSICAL else 100.0
    grid = np.geomspace(lo, 1e300, 200)
    vals = [predict(metric, kind, n).value for n in grid]
    if vals[0] is None:
        return
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert all(v > 0 for v in vals)


def test_classical_prediction_rises_below_e_to_e_squared():
    a, b = predict("be", "classical", 200.0).value, predict("be", "classical", 1500.0).value
    assert b > a


def test_finite_n_prediction_against_mpmath():
    n = 1e8
    s = make_scheme("classical", n)
    L, c = s.log_n, s.c

    def r(x):
        t = x - c
        return (mpmath.exp(-x) * (t * t + 2 * t + 2) - t * t) / (4 * L)

    ref = mpmath.quad(lambda x: lam(x) * r(x) ** 2 / 2, [-6, -2, 0, 2, 10, 40, 80])
    assert finite_n_prediction("kl", "classical", n) == pytest.approx(float(ref), rel=1e-9)


def test_finite_n_prediction_defined_for_all_pairs():
    for kind in SchemeKind:
        for m in MetricKind:
            v = finite_n_prediction(m, kind, 1e10)
            assert v > 0 and math.isfinite(v)


def test_ratio_table():
    assert ratio_table("be", "classical", []) == []
    rows = ratio_table("be", "classical", [1e8, 1e12])
    for r in rows:
        assert r.ratio_leading == pytest.approx(r.value / r.leading_prediction, rel=1e-15)
        assert r.ratio_finite == pytest.approx(r.value / r.finite_n_prediction, rel=1e-15)
        assert r.ratio_finite_err == pytest.approx(r.err_estimate / r.finite_n_prediction, rel=1e-15)
        assert 0.85 <= r.ratio_finite <= 1.15
        assert r.ratio_leading > 1.5
    second = ratio_table("kl", "second", [1e8])[0]
    assert second.leading_prediction is None and second.ratio_leading is None
    with pytest.raises(ValueError):
        ratio_table("be", "classical", [1e8, 1e6])
    with pytest.raises(ValueError):
        ratio_table("be", "classical", [10.0])


def test_mean_coefficient_arbitration():
    a = arbitrate_mean_coefficient([10.0**k for k in range(4, 41, 4)])
    assert a["winner"] == "gamma+1"
    assert a["separation"] >= 5
    assert a["fitted_coefficient"] == pytest.approx(EULER_GAMMA + 1, abs=0.1)
