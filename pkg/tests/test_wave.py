import math

import numpy as np
import pytest
from scipy import integrate

from khankel import transforms, translation, wave
from khankel.dunkl import DunklContext
from khankel.specfun import bessel_j_norm
from khankel.transforms import RadialProfile

CTX_1D = DunklContext("sign_flips", 1, (1.0,))
CTX_2D = DunklContext("sign_flips", 2, (0.7, 0.9))
CONTEXTS = [CTX_1D, CTX_2D]
EXP = RadialProfile.exponential(lambda s: np.ones_like(s), 1.0)

# --- oracle tests -----------------------------------------------------------


@pytest.mark.parametrize("alpha", [-0.25, 0.0, 1.3, 3.2])
def test_riemann_liouville_of_cosine_is_bessel(alpha):
    # Poisson's integral
    for t in (0.0, 0.5, 3.0, 9.0):
        assert wave.riemann_liouville(np.cos, alpha, t) == pytest.approx(float(bessel_j_norm(alpha, t)), abs=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 1.3])
def test_riemann_liouville_of_monomials(alpha):
    for m in range(5):
        exact = math.gamma(alpha + 1) * math.gamma(m + 0.5) / (math.sqrt(math.pi) * math.gamma(alpha + m + 1))
        assert wave.riemann_liouville(lambda s: s ** (2 * m), alpha, 1.0) == pytest.approx(exact, rel=1e-13)


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_spectral_wave_vs_quadrature(ctx):
    lam = ctx.lambda1
    for r, t in [(0.5, 0.7), (2.0, 1.5)]:
        f = lambda p: (math.cos(t * math.sqrt(2 * p)) * math.exp(-p)
                       * float(bessel_j_norm(lam, 2 * math.sqrt(r * p))) * p ** lam)
        ref = integrate.quad(f, 0, np.inf, limit=400, epsabs=1e-13)[0] / math.gamma(lam + 1)
        assert wave.wave_spectral(ctx, EXP, None, [r], t) == pytest.approx(ref, abs=1e-11)


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_damped_transform(ctx):
    for eps in (0.5, 1.0, 2.0):
        for r in (0.0, 1.0, 4.0):
            assert wave.hankel_damped_quadrature(ctx, eps, r) == pytest.approx(
                wave.hankel_damped_oracle(ctx, eps, r), abs=1e-9)


# --- properties -------------------------------------------------------------


def test_riemann_liouville_inverse_recovers_cosine():
    a = 1.3
    fit = wave.rl_inverse_fit(lambda t: bessel_j_norm(a, t), a, 4.0, degree=30)
    tt = np.linspace(0, 4, 21)
    assert not fit.ill_posed
    assert np.max(np.abs(fit(tt) - np.cos(tt))) <= 1e-9


def test_riemann_liouville_round_trip_on_polynomial():
    a = CTX_2D.lambda1
    poly = lambda t: 1 + t ** 2 - 0.3 * t ** 4 + 0.1 * t ** 8
    fit = wave.rl_inverse_fit(lambda t: wave.riemann_liouville(poly, a, t), a, 2.0, degree=8)
    tt = np.linspace(0, 2, 41)
    assert np.max(np.abs(fit(tt) - poly(tt))) <= 1e-8
    assert wave.riemann_liouville_inverse(lambda t: wave.riemann_liouville(poly, a, t), a, 1.5,
                                          degree=8) == pytest.approx(poly(1.5), abs=1e-8)


def test_riemann_liouville_inverse_flags_bad_data():
    # |t| has no smooth even preimage on a low-degree basis
    fit = wave.rl_inverse_fit(lambda t: np.abs(t - 0.5), 0.5, 1.0, degree=6, parity="any")
    assert fit.ill_posed
    with pytest.raises(wave.IllPosedInversion):
        wave.rl_inverse_fit(lambda t: np.abs(t - 0.5), 0.5, 1.0, degree=6, parity="any", strict=True)
    with pytest.raises(ValueError):
        wave.rl_inverse_fit(np.cos, 0.5, 1.0, parity="odd")


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_data_recovery_and_two_routes(ctx):
    P = transforms.laguerre_packet(ctx, [1.0, 0.5, -0.3])
    G = transforms.laguerre_packet(ctx, [0.2, -0.4])
    for r in (0.3, 1.1, 2.4):
        x = np.eye(ctx.N)[0] * r
        assert wave.wave_spectral(ctx, P, G, x, 0.0) == pytest.approx(float(P(np.array([r]))[0]), abs=1e-10)
        fit = wave.mean_route_fit(ctx, P, x, 2.0)
        for t in np.linspace(0, 2, 5):
            assert abs(fit(t) - wave.wave_spectral(ctx, P, None, x, t)) <= 1e-4
    assert wave.wave_from_mean(ctx, P, np.eye(ctx.N)[0], 1.0) == pytest.approx(
        wave.wave_spectral(ctx, P, None, np.eye(ctx.N)[0], 1.0), abs=1e-4)


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_pde_residual(ctx):
    P = transforms.laguerre_packet(ctx, [1.0, 0.5, -0.3])
    G = transforms.laguerre_packet(ctx, [0.2, -0.4])
    for r in (0.3, 1.1, 2.4):
        assert wave.wave_pde_residual(ctx, P, G, np.eye(ctx.N)[0] * r, 0.9) <= 1e-3


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_huygens_zero_response(ctx):
    x = np.eye(ctx.N)[0] * 2.25
    for c in (0.35, 2.5):
        assert wave.shell_outside_domain(x, 0.8, c, 0.15)
        ok, val = wave.huygens_check(ctx, translation.radial_bump(10.0, center=c, width=0.15), x, 0.8)
        assert ok and val <= 1e-6
    # a bump inside the domain of dependence does reach x
    assert not wave.shell_outside_domain(x, 0.8, 1.5, 0.15)
    assert not wave.huygens_check(ctx, translation.radial_bump(10.0, center=1.5, width=0.15), x, 0.8)[0]


@pytest.mark.parametrize("ctx", CONTEXTS)
def test_multiplier_energy_is_conserved(ctx):
    P = transforms.laguerre_packet(ctx, [1.0, 0.5, -0.3])
    norm2 = transforms.weighted_norm(ctx, P) ** 2
    for t in (0.0, 1.0, 2.5):
        assert wave.multiplier_energy(ctx, P, t) == pytest.approx(norm2, rel=1e-6)


def test_cone_energy_is_nonincreasing():
    ctx = CTX_2D
    P = transforms.laguerre_packet(ctx, [1.0, 0.5, -0.3])
    G = transforms.laguerre_packet(ctx, [0.2, -0.4])
    x0, t0 = np.array([2.0, 1.0]), 1.5
    es = np.array([wave.wave_energy(ctx, P, G, x0, t0, t) for t in np.linspace(0, 1.4, 8)])
    assert es[0] > 0
    assert np.max(np.diff(es)) <= 1e-5 * es[0]


def test_cone_energy_domain_errors():
    one = lambda p: np.ones(len(p))
    with pytest.raises(ValueError):
        wave.cone_energy(CTX_1D, one, one, [1.0], 0.5, 0.0)
    with pytest.raises(ValueError):
        wave.cone_energy(CTX_2D, one, one, [0.1, 0.0], 1.0, 0.0)
    with pytest.raises(ValueError):
        wave.cone_energy(CTX_2D, one, one, [2.0, 1.0], 1.0, 1.0)
