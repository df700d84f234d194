import math

import numpy as np
import pytest

from khankel import geometry
from khankel.dunkl import DunklContext
from khankel.geometry import GeometryError

CTX_2D = DunklContext("sign_flips", 2, (0.7, 0.9))

# --- oracle tests -----------------------------------------------------------


def _d_complex(x, y):
    # in the plane d(x, y) = min |sqrt z -+ sqrt w| for the complex square roots
    z, w = complex(*x), complex(*y)
    a, b = np.sqrt(z), np.sqrt(w)
    return min(abs(a - b), abs(a + b))


def test_metric_d_matches_complex_square_root_chart():
    rng = np.random.default_rng(0)
    for _ in range(500):
        x, y = rng.normal(size=(2, 2)) * rng.uniform(0.1, 5)
        assert geometry.metric_d(x, y) == pytest.approx(_d_complex(x, y), abs=1e-12)


def test_closed_riemannian_distance_equals_scaled_metric():
    rng = np.random.default_rng(1)
    P = rng.normal(size=(2000, 2, 2)) * 3
    for x, y in P:
        assert math.sqrt(2) * geometry.metric_d(x, y) == pytest.approx(geometry.riemannian_2d_closed(x, y), abs=1e-12)


@pytest.mark.parametrize("x,x0", [([1.0, 0.5], [-0.8, 1.2]), ([2.0, 0.0], [-1.5, -0.3]), ([0.5, 0.5], [1.5, 1.0])])
def test_graph_geodesic_is_upper_bound_within_two_percent(x, x0):
    x, x0 = np.array(x), np.array(x0)
    exact = math.sqrt(2) * geometry.metric_d(x, x0)
    g = geometry.graph_geodesic(x, x0, n=120)
    assert g >= exact - 1e-9
    assert g <= 1.02 * exact


# --- properties -------------------------------------------------------------


def test_metric_axioms_in_three_dimensions():
    rng = np.random.default_rng(2)
    X, Y, Z = rng.normal(size=(3, 1000, 3)) * 2
    assert np.max([geometry.triangle_defect(x, y, z) for x, y, z in zip(X, Y, Z)]) <= 1e-12
    assert np.allclose(geometry.metric_d(X, Y), geometry.metric_d(Y, X), atol=1e-15)
    assert np.all(geometry.metric_d(X, X) <= 1e-7)
    assert np.allclose(geometry.metric_d(X, np.zeros(3)), np.sqrt(np.linalg.norm(X, axis=1)), atol=1e-15)


def test_metric_is_dilation_homogeneous():
    rng = np.random.default_rng(3)
    X, Y = rng.normal(size=(2, 50, 2))
    assert np.allclose(geometry.metric_d(4 * X, 4 * Y), 2 * geometry.metric_d(X, Y), atol=1e-13)


def test_orbit_distance_and_balls():
    x, y = np.array([1.0, 0.5]), np.array([-1.0, 0.5])
    assert geometry.orbit_distance(CTX_2D, x, y) == pytest.approx(0.0, abs=1e-7)
    assert geometry.orbit_distance(CTX_2D, x, y) <= geometry.metric_d(x, y)
    r = 0.5 * geometry.metric_d(x, y)
    assert geometry.in_ball(CTX_2D, y, x, r, union=True)
    assert not geometry.in_ball(CTX_2D, y, x, r)


def test_eikonal_residual():
    rng = np.random.default_rng(4)
    for _ in range(50):
        x0, x = rng.normal(size=(2, 2)) * 2
        assert geometry.eikonal_residual(x0, x) <= 1e-6


def test_eikonal_domain_errors():
    with pytest.raises(GeometryError):
        geometry.eikonal_residual([1.0, 0.0], [0.0, 0.0])
    with pytest.raises(GeometryError):
        geometry.eikonal_residual([1.0, 0.0], [-2.0, 0.0])
    with pytest.raises(GeometryError):
        geometry.eikonal_residual([1.0, 0.0], [1.0, 0.0])


def test_geodesic_domain_errors():
    with pytest.raises(GeometryError):
        geometry.graph_geodesic(np.array([1e-4, 0.0]), np.array([1.0, 1.0]), n=50)
    with pytest.raises(ValueError):
        geometry.graph_geodesic(np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        geometry.riemannian_2d_closed(np.ones(3), np.ones(3))
