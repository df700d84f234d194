"""Generalized translations: the radial formula, the explicit 1D formula, the
Bessel-Kingman product measure and the radial representing measure."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special

from .dunkl import DunklContext, orbit, vk_rule
from .specfun import gauss_jacobi

__all__ = [
    "DiscreteMeasure",
    "translation_constant",
    "translate_radial",
    "translate_1d",
    "kernel_k_1d",
    "mean_1d_constant",
    "bessel_product_measure",
    "rho_measure",
    "radial_bump",
    "translation_support_check",
    "orbit_distance_sq",
]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point masses; ``nodes`` are radii (1D) or points (n, N)."""
    nodes: np.ndarray
    weights: np.ndarray
    total_mass: float
    support_radius_bounds: tuple = (0.0, math.inf)
    signed: bool = False

    @classmethod
    def build(cls, nodes, weights, bounds=(0.0, math.inf)) -> "DiscreteMeasure":
        nodes = np.asarray(nodes, dtype=float)
        weights = np.asarray(weights, dtype=float)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        return cls(nodes, weights, float(weights.sum()), tuple(bounds), bool(np.any(weights < 0)))

    def integrate(self, f: Callable) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def translation_constant(ctx: DunklContext) -> float:
    """Gamma((N-1)/2+<k>) / (sqrt(pi) Gamma((N-2)/2+<k>)), the inverse (1-u^2)^nu mass."""
    kt = ctx.k_total
    return math.exp(special.gammaln((ctx.N - 1) / 2 + kt) - special.gammaln((ctx.N - 2) / 2 + kt)) / math.sqrt(math.pi)


def _u_rule(ctx: DunklContext, n: int):
    nu = ctx.translation_exponent
    rule = gauss_jacobi(n, nu, nu)
    return rule.nodes, rule.weights * translation_constant(ctx)


def _rho_nodes(ctx: DunklContext, x, y, n_u: int, n_vk: int):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rx, ry = np.linalg.norm(x), np.linalg.norm(y)
    T, W = vk_rule(ctx, n_vk)
    u, wu = _u_rule(ctx, n_u)
    inner = (T * x) @ y  # <eta, y> for eta = t * x
    B = np.sqrt(np.clip(2 * (rx * ry + inner), 0, None))
    radii = (rx + ry) - B[:, None] * u[None, :]
    weights = W[:, None] * wu[None, :]
    return np.clip(radii, 0, None).ravel(), weights.ravel()


def translate_radial(ctx: DunklContext, f0: Callable, x, y, n_u: int = 48, n_vk: int = 32) -> float:
    """tau_y f(x) for a radial function f = f0(|.|)."""
    radii, w = _rho_nodes(ctx, x, y, n_u, n_vk)
    return float(np.dot(w, f0(radii)))


def orbit_distance_sq(ctx: DunklContext, x, y) -> float:
    """min over the group of |gx| + |y| - sqrt(2(|x||y| + <gx, y>))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rx, ry = np.linalg.norm(x), np.linalg.norm(y)
    best = math.inf
    for gx in orbit(ctx, x):
        best = min(best, rx + ry - math.sqrt(max(2 * (rx * ry + float(gx @ y)), 0.0)))
    return max(best, 0.0)


def rho_measure(ctx: DunklContext, x, y, n_u: int = 64, n_vk: int = 64) -> DiscreteMeasure:
    """Radial representing measure of f -> tau_y f(x), as masses on radii |xi|.

    Only exactly coinciding radii are merged.
    """
    radii, w = _rho_nodes(ctx, x, y, n_u, n_vk)
    uniq, inv = np.unique(radii, return_inverse=True)
    wm = np.bincount(inv, weights=w)
    rx, ry = np.linalg.norm(x), np.linalg.norm(y)
    top = max(float(gx @ np.asarray(y, dtype=float)) for gx in orbit(ctx, x))
    upper = rx + ry + math.sqrt(max(2 * (rx * ry + top), 0.0))
    return DiscreteMeasure.build(uniq, wm, (math.sqrt(orbit_distance_sq(ctx, x, y)), math.sqrt(upper)))


# ---------------------------------------------------------------------------
# one dimension


def mean_1d_constant(k: float, n: int = 2) -> float:
    """M_{k,n} fitted by requiring the mean of f = 1 to be 1."""
    # int_0^pi sin^{nk(2)-n} phi dphi = sqrt(pi) Gamma((2nk-n+1)/2) / Gamma((2nk-n)/2 + 1)
    e = 2 * n * k - n
    integral = math.sqrt(math.pi) * math.exp(special.gammaln((e + 1) / 2) - special.gammaln(e / 2 + 1))
    return n / integral


def kernel_k_1d(k: float, x: float, t: float, cos_phi):
    """K(x, t, phi) at n = 2: sgn(x) C_2^{2k-1}(w) / C_2^{2k-1}(1)."""
    cos_phi = np.asarray(cos_phi, dtype=float)
    ax, at = abs(x), abs(t)
    r = ax + at - 2 * math.sqrt(ax * at) * cos_phi
    safe = np.where(r > 0, r, 1.0)
    w = np.where(r > 0, (math.sqrt(ax) - math.sqrt(at) * cos_phi) / np.sqrt(safe), 1.0)
    w = np.clip(w, -1.0, 1.0)
    lam = 2 * k - 1
    # C_2^lam(w) = 2 lam (lam+1) w^2 - lam, C_2^lam(1) = lam (2 lam + 1); lam -> 0 gives T_2
    return np.sign(x) * (2 * (lam + 1) * w ** 2 - 1) / (2 * lam + 1)


def _phi_rule(k: float, n_phi: int):
    a = 2 * k - 1.5
    rule = gauss_jacobi(n_phi, a, a)
    return rule.nodes, rule.weights / rule.weights.sum()


def translate_1d(ctx: DunklContext, f: Callable, x: float, t: float, n: int = 2,
                 n_phi: int = 64, return_measure: bool = False):
    """Explicit 1D formula at n = 2, normalized so that f = 1 maps to 1.

    The value equals (f(x*t) + f(x*(-t)))/2. ``t`` enters only through |t|.
    With ``return_measure`` the positive representing measure on the real
    line is returned instead.
    """
    if ctx.N != 1:
        raise ValueError("translate_1d requires N = 1")
    if n != 2:
        raise NotImplementedError("only n = 2 (a = 1) is implemented")
    k = ctx.k[0]
    if k < 0.5:
        raise ValueError("translate_1d requires k >= 1/2")
    c, w = _phi_rule(k, n_phi)
    r = abs(x) + abs(t) - 2 * math.sqrt(abs(x * t)) * c
    r = np.clip(r, 0, None)
    K = kernel_k_1d(k, x, t, c)
    if return_measure:
        nodes = np.concatenate([r, -r])
        weights = np.concatenate([w * (1 + K) / 2, w * (1 - K) / 2])
        return DiscreteMeasure.build(nodes, weights)
    fp, fm = f(r), f(-r)
    fe, fo = (fp + fm) / 2, (fp - fm) / 2
    return float(np.dot(w, fe + K * fo))


# ---------------------------------------------------------------------------
# Bessel-Kingman product measure


def bessel_product_measure(alpha: float, u: float, v: float, n_nodes: int = 48) -> DiscreteMeasure:
    """Probability measure nu with j_a(uw) j_a(vw) = int j_a(xi w) dnu(xi).

    Discretizes xi = sqrt(u^2 + v^2 - 2uv cos theta) against sin^{2a} theta,
    which in c = cos theta is the Gauss-Jacobi weight (1-c^2)^{a-1/2}.
    """
    if not alpha > -0.5:
        raise ValueError("alpha must exceed -1/2")
    rule = gauss_jacobi(n_nodes, alpha - 0.5, alpha - 0.5)
    w = rule.weights / rule.weights.sum()
    xi = np.sqrt(np.clip(u * u + v * v - 2 * u * v * rule.nodes, 0, None))
    return DiscreteMeasure.build(xi, w, (abs(u - v), u + v))


# ---------------------------------------------------------------------------
# support


def radial_bump(r_support: float, center: float = 0.0, width: Optional[float] = None) -> Callable:
    """Smooth nonnegative profile of |xi| vanishing unless sqrt(|xi|) lies in
    (center - width, center + width) intersected with [0, r_support)."""
    if width is None:
        width = r_support - center

    def f0(s):
        q = (np.sqrt(np.clip(np.asarray(s, dtype=float), 0, None)) - center) / width
        inside = (np.abs(q) < 1) & (np.sqrt(np.clip(s, 0, None)) < r_support)
        out = np.zeros(np.shape(q))
        out[inside] = np.exp(-1.0 / (1.0 - q[inside] ** 2))
        return out

    return f0


def translation_support_check(ctx: DunklContext, x, r: float, probes, margin: float = 1e-3,
                              n_u: int = 48, n_vk: int = 32):
    """Bump f with sqrt|xi| < r; check tau_x f vanishes at probes farther than
    r + margin (in the metric d) from every orbit point of x.

    Returns (passed, worst_violation).
    """
    f0 = radial_bump(r)
    worst = 0.0
    for y in np.atleast_2d(np.asarray(probes, dtype=float)):
        if math.sqrt(orbit_distance_sq(ctx, x, y)) > r + margin:
            worst = max(worst, abs(translate_radial(ctx, f0, x, y, n_u, n_vk)))
    return worst <= 1e-8, worst
