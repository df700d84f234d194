import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from khankel import specfun

# --- oracle tests -----------------------------------------------------------


@pytest.mark.parametrize("lam", [-0.5, -0.25, 0.0, 0.5, 1.7, 6.0])
def test_bessel_j_norm_matches_mpmath(lam):
    for x in [0.0, 0.3, 1.9, 2.1, 7.5, 40.0]:
        ref = float(mpmath.hyp0f1(lam + 1, -mpmath.mpf(x) ** 2 / 4))
        assert specfun.bessel_j_norm(lam, x) == pytest.approx(ref, abs=1e-13)


def _beta_moment_mp(a, b, p):
    # expand u^p = ((1+u) - 1)^p and integrate each term exactly, at 50 digits
    with mpmath.workdps(50):
        a, b = mpmath.mpf(a), mpmath.mpf(b)
        total = mpmath.mpf(0)
        for j in range(p + 1):
            total += (mpmath.binomial(p, j) * (-1) ** (p - j) * mpmath.mpf(2) ** (a + b + j + 1)
                      * mpmath.beta(a + 1, b + j + 1))
        return float(total)


@pytest.mark.parametrize("a,b", [(-0.5, 0.5), (0.3, 1.7), (2.5, -0.25), (0.0, 0.0)])
def test_beta_moments_match_mpmath(a, b):
    for p in range(16):
        ref = _beta_moment_mp(a, b, p)
        assert specfun.beta_moment_jacobi(a, b, p) == pytest.approx(ref, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("a,b", [(-0.5, 0.5), (0.3, 1.7), (4.0, 0.0)])
def test_gauss_jacobi_exact_on_polynomials(a, b):
    rule = specfun.gauss_jacobi(10, a, b)
    for p in range(2 * 10):
        exact = specfun.beta_moment_jacobi(a, b, p)
        got = float(rule.weights @ rule.nodes ** p)
        scale = abs(exact) if exact != 0 else rule.total_weight()
        assert abs(got - exact) <= 1e-12 * scale


def test_gauss_laguerre_moments():
    for alpha in (0.0, 0.5, 2.3):
        rule = specfun.gauss_laguerre(20, alpha)
        for p in range(0, 30, 3):
            assert rule.weights @ rule.nodes ** p == pytest.approx(math.gamma(alpha + p + 1), rel=1e-12)


def test_laguerre_matches_exact_rationals():
    for l in (0, 1, 5, 12, 18):
        for mu in (Fraction(1, 2), Fraction(3)):
            for t in (Fraction(1, 3), Fraction(7, 2), Fraction(11)):
                ref = float(specfun.laguerre_exact(l, mu, t))
                assert float(specfun.laguerre(l, float(mu), float(t))) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_gegenbauer_matches_mpmath():
    u = np.linspace(-1, 1, 41)
    for n in (0, 1, 4, 10, 11, 19, 25):
        for lam in (0.25, 1.0, 3.5):
            ref = np.array([float(mpmath.gegenbauer(n, lam, x, zeroprec=200)) for x in u])
            scale = specfun.gegenbauer_at_one(n, lam)
            assert np.max(np.abs(specfun.gegenbauer(n, lam, u) - ref)) <= 1e-12 * scale


def test_laguerre_sum_and_recurrence_agree():
    t = np.linspace(0, 20, 81)
    for l in range(7):
        for mu in (-0.5, 0.0, 2.5):
            a = specfun._laguerre_sum(l, mu, t)
            b = specfun._laguerre_rec(l, mu, t)
            assert np.all(np.abs(a - b) <= 1e-10 * np.maximum(np.abs(b), 1.0))


@pytest.mark.parametrize("nu,a,b", [(-0.5, 1.0, 2.0), (0.5, 0.5, 1.0), (2.0, 2.0, 6.0), (4.5, 1.0, 0.0)])
def test_laplace_bessel_closed_form_vs_quad(nu, a, b):
    f = lambda t: math.exp(-a * t) * t ** nu * float(specfun.bessel_j_norm(nu, b * math.sqrt(t)))
    ref = integrate.quad(f, 0, np.inf, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
    assert specfun.laplace_bessel_closed(nu, a, b) == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_halfline_integrate_vs_closed_form():
    for nu in (0.5, 2.0):
        for b in (0.0, 3.0):
            got = specfun.halfline_integrate(lambda t: specfun.bessel_j_norm(nu, b * np.sqrt(t)),
                                             nu, exp_rate=2.0, n=100)
            assert got == pytest.approx(specfun.laplace_bessel_closed(nu, 2.0, b), rel=1e-10)


# --- properties -------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(-0.45, 8.0), x=st.floats(0.05, 60.0))
def test_bessel_ode_residual_small(lam, x):
    assert specfun.bessel_ode_residual(lam, x) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 30), lam=st.floats(0.05, 5.0), u=st.floats(-1.0, 1.0))
def test_gegenbauer_bound(n, lam, u):
    assert abs(specfun.gegenbauer(n, lam, u)) <= specfun.gegenbauer_at_one(n, lam) * (1 + 1e-12)


def test_bessel_j_norm_even_and_one_at_zero():
    x = np.linspace(-30, 30, 121)
    assert np.allclose(specfun.bessel_j_norm(1.3, x), specfun.bessel_j_norm(1.3, -x))
    assert specfun.bessel_j_norm(1.3, 0.0) == 1.0


def test_discrete_gauss_rule_matches_moments():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 3, 500)
    w = rng.uniform(0, 1, 500)
    nodes, weights = specfun.discrete_gauss_rule(x, w, 8)
    assert np.all(weights > 0)
    assert nodes.min() >= x.min() and nodes.max() <= x.max()
    for p in range(15):
        assert weights @ nodes ** p == pytest.approx(w @ x ** p, rel=1e-10)


def test_discrete_gauss_rules_batched_agrees_with_single():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 2, (40, 300))
    W = rng.uniform(0, 1, (40, 300)) * (rng.uniform(size=(40, 300)) > 0.3)
    W[5] = 0.0
    nodes, weights = specfun.discrete_gauss_rules(X, W, 6)
    assert weights[5].sum() == 0
    for p in (0, 7, 33):
        a, b = specfun.discrete_gauss_rule(X[p], W[p], 6)
        assert np.allclose(np.sort(nodes[p]), np.sort(a), atol=1e-10)
        assert weights[p].sum() == pytest.approx(b.sum(), rel=1e-13)


def test_invalid_parameters_raise():
    with pytest.raises(ValueError):
        specfun.gauss_jacobi(5, -1.0, 0.0)
    with pytest.raises(ValueError):
        specfun.bessel_j_norm(-1.0, 1.0)
    with pytest.raises(ValueError):
        specfun.gegenbauer(3, 0.5, 1.5)
