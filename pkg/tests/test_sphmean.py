import numpy as np
import pytest

from khankel import kernels, sphmean, transforms
from khankel.dunkl import DunklContext
from khankel.translation import radial_bump

CTX_1D = DunklContext("sign_flips", 1, (1.0,))
CTX_2D = DunklContext("sign_flips", 2, (0.7, 0.9))
X, T = np.array([0.8, -0.5]), 0.6


@pytest.fixture(scope="module")
def sigma():
    return sphmean.sigma_measure(CTX_2D, X, T)


# --- oracle tests -----------------------------------------------------------


def test_heat_mean_matches_sigma_route(sigma):
    # two independent constructions of the mean of a heat kernel
    for z, s in [(np.array([0.3, 1.1]), 0.7), (np.array([-1.5, -0.2]), 1.4)]:
        direct = sphmean.heat_mean(CTX_2D, z, s, X, T)
        via_sigma = sum(w * kernels.heat_kernel(CTX_2D, p, z, s) for p, w in zip(sigma.nodes, sigma.weights))
        assert direct > 0
        assert direct == pytest.approx(via_sigma, abs=1e-10)


def test_product_formula(sigma):
    for z in ([1.0, 2.0], [-2.0, 0.5], [0.1, -3.0], [0.0, 0.0]):
        assert sphmean.product_formula_residual(CTX_2D, X, T, np.array(z), measure=sigma) <= 1e-9


@pytest.mark.parametrize("k", [0.75, 1.0, 2.0])
def test_1d_mean_of_kernel(k):
    ctx = DunklContext("sign_flips", 1, (k,))
    xi = 0.9
    B = lambda P: kernels.kernel_b1_batch(ctx, np.asarray(P).reshape(-1, 1), np.array([[xi]]))
    for x, t in [(0.7, 1.3), (-2.0, 0.4)]:
        expected = float(B([x])[0]) * float(B([t])[0] + B([-t])[0]) / 2
        assert sphmean.spherical_mean(ctx, B, [x], t) == pytest.approx(expected, abs=1e-12)
        for method in ("explicit", "compound"):
            mu = sphmean.sigma_measure(ctx, np.array([x]), t, method=method)
            assert float(np.dot(mu.weights, B(mu.nodes))) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("k", [0.6, 1.0, 4.0])
def test_1d_sigma_near_critical_radius(k):
    # t just below |x| is where the compound rule loses accuracy in 1D
    ctx = DunklContext("sign_flips", 1, (k,))
    x = np.array([-1.3])
    for t in (1.3 * (1 - 1e-9), 1.3, 1.3 * (1 + 1e-5)):
        mu = sphmean.sigma_measure(ctx, x, t)
        assert not mu.signed and mu.total_mass == pytest.approx(1.0, abs=1e-13)
        for z in ([0.4], [-2.2]):
            assert sphmean.product_formula_residual(ctx, x, t, np.array(z), measure=mu) <= 1e-12


# --- properties -------------------------------------------------------------


def test_sigma_is_probability_with_support_in_annulus(sigma):
    assert not sigma.signed
    assert sigma.total_mass == pytest.approx(1.0, abs=1e-9)
    lo, hi = sigma.support_radius_bounds
    root = np.sqrt(np.linalg.norm(sigma.nodes, axis=1))
    assert root.min() >= lo - 1e-9 and root.max() <= hi + 1e-9


def test_sigma_at_zero_radius_is_dirac():
    mu = sphmean.sigma_measure(CTX_2D, X, 0.0)
    assert np.array_equal(mu.nodes, X[None, :]) and mu.total_mass == 1.0
    with pytest.raises(ValueError):
        sphmean.sigma_measure(CTX_2D, X, -1.0)
    with pytest.raises(ValueError):
        sphmean.sigma_measure(CTX_2D, X, T, method="explicit")
    with pytest.raises(ValueError):
        sphmean.sigma_measure(CTX_1D, [0.5], T, method="tensor")


def test_radial_routes_agree(sigma):
    P = transforms.laguerre_packet(CTX_2D, [1.0, 0.5, -0.3])
    radial = sphmean.radial_mean(CTX_2D, P, X, T)
    assert sphmean.mean_multiplier_route(CTX_2D, P, X, T) == pytest.approx(radial, abs=1e-10)
    assert sphmean.spherical_mean(CTX_2D, P, X, T) == pytest.approx(radial, abs=1e-13)
    via_sigma = float(np.dot(sigma.weights, P(np.linalg.norm(sigma.nodes, axis=1))))
    assert via_sigma == pytest.approx(radial, abs=1e-9)


def test_mean_at_origin_and_of_constants():
    P = transforms.laguerre_packet(CTX_2D, [1.0, 0.5, -0.3])
    assert sphmean.radial_mean(CTX_2D, P, np.zeros(2), T) == pytest.approx(float(P(np.array([T]))[0]), abs=1e-12)
    assert sphmean.radial_mean(CTX_2D, lambda s: np.ones_like(s), X, 2.0) == pytest.approx(1.0, abs=1e-13)
    assert sphmean.spherical_mean(CTX_2D, P, X, 0.0) == pytest.approx(float(P(np.array([np.linalg.norm(X)]))[0]))


def test_multiplier_identity():
    P = transforms.laguerre_packet(CTX_2D, [1.0, 0.5, -0.3])
    assert sphmean.multiplier_residual(CTX_2D, P, T, np.linspace(0, 5, 11)) <= 1e-8


def test_multiplier_route_needs_closed_transform():
    prof = transforms.RadialProfile.compact(radial_bump(1.0), 1.0)
    with pytest.raises(ValueError):
        sphmean.mean_multiplier_route(CTX_2D, prof, X, T)
    with pytest.raises(ValueError):
        sphmean.spherical_mean(CTX_2D, prof, X, T, route="nowhere")


def test_positivity_scan_small():
    fam1 = [lambda y, c=c: np.exp(-1 / np.clip(1 - (y - c) ** 2, 1e-300, None)) * (np.abs(y - c) < 1)
            for c in (-1.0, 0.5, 2.0)]
    grid1 = [(x, t) for x in (-2.0, -0.4, 0.3, 1.5) for t in (0.2, 1.0, 3.0)]
    rep = sphmean.positivity_scan(CTX_1D, fam1, grid1)
    assert rep.passed and rep.evaluations == 36
    fam2 = [radial_bump(r, center=c, width=0.3) for r, c in [(1.0, 0.5), (2.0, 1.4)]]
    grid2 = [(np.array([a, b]), t) for a, b in [(0.5, 0.5), (-1.0, 2.0)] for t in (0.3, 1.5)]
    rep = sphmean.positivity_scan(CTX_2D, fam2, grid2)
    assert rep.passed and len(rep.worst) == 5


def test_equivariance():
    fam = [lambda P: np.exp(-np.sum((P - np.array([0.5, 0.2])) ** 2, axis=-1)),
           lambda P: P[..., 0] ** 2 * np.exp(-np.linalg.norm(P, axis=-1))]
    e_group, e_scale = sphmean.equivariance_check(CTX_2D, X, T, 1.7, np.array([-1, 1]), fam)
    assert e_group <= 1e-10 and e_scale <= 1e-10
