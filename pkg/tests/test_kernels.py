import math

import numpy as np
import pytest
from scipy import integrate, special

from khankel import kernels
from khankel.dunkl import DunklContext
from khankel.specfun import bessel_j_norm

CTX_1D = DunklContext("sign_flips", 1, (1.0,))
CTX_2D = DunklContext("sign_flips", 2, (0.7, 0.9))

# --- oracle tests -----------------------------------------------------------


def _kernel_1d_quad(k, x, xi):
    # B(x, xi) = int j_{k-1}(sqrt(2|x xi|(1 + s t))) dmu_k(t), s = sgn(x xi)
    lam = k - 1
    dens = lambda t: (1 - t) ** (k - 1) * (1 + t) ** k
    Z = integrate.quad(dens, -1, 1)[0]
    s = math.copysign(1.0, x * xi)
    f = lambda t: dens(t) * float(bessel_j_norm(lam, math.sqrt(max(2 * abs(x * xi) * (1 + s * t), 0.0))))
    return integrate.quad(f, -1, 1, limit=200, epsabs=1e-14)[0] / Z


@pytest.mark.parametrize("k", [0.75, 1.0, 2.5])
def test_kernel_1d_matches_independent_quadrature(k):
    ctx = DunklContext("sign_flips", 1, (k,))
    for x, xi in [(0.5, 1.0), (-2.0, 1.5), (3.0, -3.0), (-0.1, -4.0)]:
        ref = _kernel_1d_quad(k, x, xi)
        assert kernels.kernel_b1(ctx, [x], [xi]).value == pytest.approx(ref, abs=1e-10)


def test_kernel_trivial_group_is_bessel_j0():
    # no reflections in dimension 3: the profile index is 0, so B = J_0
    ctx = DunklContext("trivial", 3)
    rng = np.random.default_rng(2)
    X, Xi = rng.normal(size=(20, 3)), rng.normal(size=(20, 3))
    z = np.sqrt(2 * (np.linalg.norm(X, axis=1) * np.linalg.norm(Xi, axis=1) + np.sum(X * Xi, axis=1)))
    assert np.allclose(kernels.kernel_b1_batch(ctx, X, Xi), special.j0(z), atol=1e-14)


@pytest.mark.parametrize("x", [0.0, 0.7, -1.9])
def test_heat_kernel_has_unit_mass_1d(x):
    ctx = CTX_1D
    t = 0.8
    k = ctx.k[0]
    f = lambda y: kernels.heat_kernel(ctx, [x], [y], t) * abs(y) ** (-1) * abs(math.sqrt(2) * y) ** (2 * k)
    mass = sum(integrate.quad(f, a, b, limit=200, epsabs=1e-12)[0] for a, b in [(-np.inf, 0), (0, np.inf)])
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_heat_kernel_at_origin_closed_form():
    t, y = 0.5, np.array([0.3, -1.2])
    expected = CTX_2D.c_k1 * t ** (-(CTX_2D.lambda1 + 1)) * math.exp(-np.linalg.norm(y) / t)
    assert kernels.heat_kernel(CTX_2D, np.zeros(2), y, t) == pytest.approx(expected, rel=1e-14)


# --- properties -------------------------------------------------------------


@pytest.mark.parametrize("ctx", [CTX_1D, CTX_2D])
def test_kernel_bound_and_symmetry(ctx):
    rng = np.random.default_rng(7)
    X = rng.uniform(-3, 3, (500, ctx.N))
    Xi = rng.uniform(-3, 3, (500, ctx.N))
    B = kernels.kernel_b1_batch(ctx, X, Xi)
    assert np.max(np.abs(B)) <= 1 + 1e-8
    assert np.max(np.abs(B - kernels.kernel_b1_batch(ctx, Xi, X))) <= 1e-8
    assert np.all(kernels.kernel_b1_batch(ctx, np.zeros(ctx.N), Xi) == 1.0)


def test_eigen_equation_residuals():
    assert kernels.eigen_residual(CTX_1D, [1.3], [-0.8]) <= 1e-4
    assert kernels.eigen_residual(CTX_2D, [1.1, -0.6], [0.4, 1.5]) <= 1e-3


@pytest.mark.parametrize("ctx", [CTX_1D, CTX_2D])
def test_spherical_average_is_bessel(ctx):
    for x, v in [(np.full(ctx.N, 0.9), 1.2), (np.linspace(-1, 2, ctx.N), 2.5)]:
        ref = float(bessel_j_norm(ctx.lambda1, 2 * math.sqrt(np.linalg.norm(x) * v)))
        assert kernels.kernel_spherical_avg(ctx, x, v) == pytest.approx(ref, abs=1e-7)


def test_kernel_b1_reports_error_estimate():
    ev = kernels.kernel_b1(CTX_2D, [1.0, 2.0], [0.5, -1.0])
    assert ev.method == "vk_quadrature" and ev.error_estimate < 1e-10
    assert kernels.kernel_b1(CTX_2D, [0.0, 0.0], [1.0, 1.0]).method == "origin_shortcut"
