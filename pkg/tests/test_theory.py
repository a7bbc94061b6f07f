import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chemotax.theory import (
    Interval,
    ModelParams,
    Verdict,
    classify,
    equilibrium,
    gn_theta,
    gn_theta1,
    gn_theta2,
    gradient_range,
    interval_I,
    interval_J,
    theta0,
)

B, N, X = Verdict.BOUNDED, Verdict.NO_GUARANTEE, Verdict.BLOWUP_POSSIBLE

# (params, verdict, fragment of matched_condition)
CASES = [
    (dict(tau=0, k=0.3, l=0.7), B, "k < l"),
    (dict(tau=0, k=0.9, l=0.6), B, "(0, 2/n)"),
    (dict(tau=0, k=1.5, l=1.5, alpha=0.5, gamma0=1.0), B, "Theta0 < 0"),
    (dict(tau=0, k=0.5, l=0.5, alpha=0.86, gamma0=0.5), B, "(0, 2/n)"),
    (dict(tau=0, k=1.5, l=1.5, alpha=2.0, gamma0=1.0), N, "no boundedness"),
    (dict(tau=0, k=1.2, l=1.0, alpha=0.8, gamma0=1.0), N, "no boundedness"),
    (dict(tau=0, k=1.0, l=0.8), N, "no boundedness"),  # k = 2/n
    (dict(tau=1, k=0.5, l=0.5), B, "k, l in I"),
    (dict(tau=1, k=0.4, l=0.7), B, "one of k, l in I"),
    (dict(tau=1, k=0.7, l=0.2), B, "one of k, l in I"),
    (dict(tau=1, k=0.6, l=0.7), B, "k, l in J"),
    (dict(tau=1, k=0.75, l=0.6), N, "outside"),  # k = 1/n + 2/(n^2+4)
    (dict(tau=1, k=0.8, l=0.8, alpha=0.42), N, "outside"),
    (dict(tau=1, k=0.6, l=0.6, n=3), N, "outside"),
    (dict(variant="nonlocal", k=0.5, l=1.0), B, "k < l"),
    (dict(variant="nonlocal", k=1.5, l=1.5, alpha=0.5), B, "Theta0 < 0"),
    (dict(variant="nonlocal", k=0.7, l=0.7, alpha=2.0), B, "k = l in (0, 2/n)"),
    (dict(variant="nonlocal", k=0.9, l=0.5, alpha=2.0), B, "0 < k < 2/n"),
    (dict(variant="nonlocal", k=1.1, l=0.9), X, "k > l and k > 2/n"),
    (dict(variant="nonlocal", k=1.0, l=0.5), N, "no criterion"),  # k = 2/n
    (dict(variant="nonlocal", k=1.5, l=1.5, alpha=2.0), N, "no criterion"),
]


@pytest.mark.parametrize("kw,verdict,fragment", CASES)
def test_classify_cases(kw, verdict, fragment):
    got = classify(ModelParams(**kw))
    assert got.verdict is verdict
    assert fragment in got.matched_condition


def test_theta0_values():
    assert theta0(ModelParams(k=1, l=1, alpha=1.3, gamma0=1.3)) == 0.0
    assert theta0(ModelParams(k=1, l=1, alpha=1.0, gamma0=1.2)) == pytest.approx(-0.2)
    with pytest.raises(ValueError):
        ModelParams(k=1, l=1, chi=2, alpha=0.0)


@pytest.mark.parametrize(
    "kw",
    [dict(k=-1, l=1), dict(k=1, l=0), dict(k=1, l=1, gamma1=0.5), dict(k=1, l=1, tau=2),
     dict(k=1, l=1, variant="x"), dict(k=1, l=1, variant="nonlocal", tau=1),
     dict(k=1, l=1, n=1), dict(k=1, l=1, beta=math.inf)],
)
def test_params_validation(kw):
    with pytest.raises(ValueError):
        ModelParams(**kw)


def test_table_rows_classification():
    # Row 1 bounded by theory, row 2 and the last parabolic row carry no guarantee
    assert classify(ModelParams(tau=0, k=0.5, l=0.5, alpha=0.86, gamma0=0.5)).verdict is B
    assert classify(ModelParams(tau=0, k=1.2, l=1.0, alpha=0.8)).verdict is N
    assert classify(ModelParams(tau=1, k=0.8, l=0.8, alpha=0.42)).verdict is N


@given(st.floats(0.01, 0.99), st.floats(-5, 5))
def test_equal_exponents_below_two_over_n_bounded_for_any_theta0(k, th):
    alpha = max(1.0 + th, 1e-3)
    p = ModelParams(k=k, l=k, alpha=alpha, gamma0=1.0)
    assert classify(p).verdict is B


@given(st.floats(0.01, 3), st.floats(0.01, 3), st.sampled_from([0, 1]), st.integers(2, 5))
def test_local_never_blowup(k, l, tau, n):
    assert classify(ModelParams(k=k, l=l, tau=tau, n=n)).verdict is not X


def test_gn_theta():
    assert gn_theta(2, 2.0) == pytest.approx(0.5)
    t = gn_theta(2, 1e6)
    assert 0.999 < t < 1.0
    with pytest.raises(ValueError):
        gn_theta(3, 1.0)
    with pytest.raises(ValueError):
        gn_theta(2, 1.0)


def test_gn_theta1():
    t1, comp = gn_theta1(2, 3.0, 2.0)
    assert t1 == pytest.approx(0.5)
    assert comp == pytest.approx(5.0 / 6.0)
    t1, comp = gn_theta1(2, 2.0, 1.0001)
    assert 0 < t1 < 1e-3 and 0 < comp < 1e-3
    with pytest.raises(ValueError):
        gn_theta1(2, 3.0, 1.0)
    with pytest.raises(ValueError):
        gn_theta1(2, 2.0, 2.0)  # p must exceed l


def test_gn_theta2():
    t2, comp = gn_theta2(2, 2.0, 0.5)
    assert t2 == pytest.approx(0.6)
    assert comp == pytest.approx(0.75)
    assert gn_theta2(2, 2.0, 1.0)[1] == 1.0
    assert gn_theta2(2, 2.0, 1.5)[1] > 1.0
    with pytest.raises(ValueError):
        gn_theta2(2, 1.0, 0.5)
    with pytest.raises(ValueError):
        gn_theta2(4, 3.0, 4.0)  # theta2 would reach 1


def test_gn_theta1_random_ranges():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(2, 5))
        l = rng.uniform(1.0, 4.0)
        if l == 1.0:
            continue
        bound = max(l, l * (n * l - 2) / n, n / 2)
        p = bound * (1 + rng.uniform(1e-6, 3.0))
        t1, comp = gn_theta1(n, p, l)
        assert 0 < t1 < 1 and 0 < comp < 1


def test_gradient_range():
    assert gradient_range(0.5, 2) == Interval(1.0, math.inf)
    r = gradient_range(0.6, 2)
    assert r.hi == pytest.approx(10.0)
    assert 9.99 in r and 10.001 not in r and 1.0 in r and 0.99 not in r
    r = gradient_range(0.75, 2)
    assert r.hi == pytest.approx(4.0)
    with pytest.raises(ValueError):
        gradient_range(0.0, 2)
    with pytest.raises(ValueError):
        gradient_range(1.2, 2)


@given(st.integers(2, 8), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_gradient_range_decreasing(n, a, b):
    lo = 1.0 / n
    e1, e2 = sorted((lo + (1 - lo) * a, lo + (1 - lo) * b))
    if not (lo < e1 < e2 <= 1):
        return
    assert gradient_range(e1, n).hi >= gradient_range(e2, n).hi


def test_intervals():
    J2 = interval_J(2)
    assert (J2.lo, J2.hi) == (0.5, 0.75)
    assert 0.5 not in J2 and 0.75 not in J2 and 0.6 in J2
    J3 = interval_J(3)
    assert J3.hi == pytest.approx(1 / 3 + 2 / 13)
    for n in range(2, 11):
        J = interval_J(n)
        assert J.lo < J.hi < 2.0 / n
    I2 = interval_I(2)
    assert 0.5 in I2 and 0.0 not in I2
    assert str(J2) == "(0.5, 0.75)"


def test_equilibrium():
    p = ModelParams(k=1.1, l=1.2, alpha=2.0, gamma0=3.0, delta=1.5)
    assert equilibrium(p, 0.0, 10.0) == (0.0, 0.0, 2.0)
    q = ModelParams(k=1.7, l=1.0, alpha=2.0, beta=2.0)
    assert equilibrium(q, 5.0, 5.0)[1] == pytest.approx(1.0)
    m, area = 1200 * math.pi, 81 * math.pi
    u, v, w = equilibrium(ModelParams(k=1.1, l=1.2), m, area)
    assert u == pytest.approx(14.81481, rel=1e-5)
    assert v == pytest.approx(u**1.1)
    assert w == pytest.approx((1 + u) ** 1.2)
    # constant state solves the stationary chemical equations
    assert -1.0 * v + 1.0 * u**1.1 == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        equilibrium(p, -1.0, 1.0)


def test_theta2_composite_symbolic():
    import sympy

    n, p, k = sympy.symbols("n p k", positive=True)
    t2 = (p / 2 - p / (2 * (p + k))) / (p / 2 + 1 / n - sympy.Rational(1, 2))
    composite = sympy.simplify((p + k) / p * t2)
    assert sympy.simplify(composite - (p + k - 1) / (p - 1 + 2 / n)) == 0
    # composite - 1 has the sign of k - 2/n when p > n/2
    diff = sympy.factor(sympy.together(composite - 1))
    assert sympy.simplify(diff - (k - 2 / n) / (p - 1 + 2 / n)) == 0
    for nv, pv, kv in [(2, 2.0, 0.5), (3, 4.0, 1.7), (5, 3.0, 0.2)]:
        assert gn_theta2(nv, pv, kv)[1] == pytest.approx(float(composite.subs({n: nv, p: pv, k: kv})))
