"""Riemann-Liouville transform and its inverse, the deformed wave propagator
u_tt = 2|x| Delta_k u in spectral and mean-value form, weak Huygens checks
and the domain-of-dependence energy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special

from .dunkl import DunklContext, ScalarField, dunkl_laplacian, weight_k
from .specfun import bessel_j_norm, bessel_j_norm_deriv, gauss_jacobi, gauss_laguerre, gauss_legendre
from .sphmean import _b2_distribution, _mean_from_b2
from .transforms import RadialProfile, fourier_k1_radial, radial_rule

__all__ = [
    "riemann_liouville",
    "RLInverse",
    "rl_inverse_fit",
    "riemann_liouville_inverse",
    "wave_spectral",
    "wave_profile",
    "wave_from_mean",
    "mean_route_fit",
    "wave_pde_residual",
    "multiplier_energy",
    "huygens_check",
    "shell_outside_domain",
    "cone_energy",
    "wave_energy",
    "hankel_damped_oracle",
    "hankel_damped_quadrature",
    "IllPosedInversion",
]


class IllPosedInversion(RuntimeError):
    """The collocation inverse does not reproduce its data to tolerance."""


# ---------------------------------------------------------------------------
# Riemann-Liouville transform


def _rl_constant(alpha: float) -> float:
    return 2 * math.exp(special.gammaln(alpha + 1) - special.gammaln(alpha + 0.5)) / math.sqrt(math.pi)


def _rl_rule(alpha: float, n: int):
    # (1 - s^2)^(alpha-1/2) on [0, 1] = (1-s)^(alpha-1/2) (1+s)^(alpha-1/2):
    # the first factor goes into a Gauss-Jacobi weight, the second rides along
    rule = gauss_jacobi(n, alpha - 0.5, 0.0)
    s = (1 + rule.nodes) / 2
    w = rule.weights * 0.5 ** (alpha + 0.5) * (1 + s) ** (alpha - 0.5) * _rl_constant(alpha)
    return s, w


def riemann_liouville(f: Callable, alpha: float, t, n: int = 64):
    """R_alpha f(t) = C_alpha int_0^1 f(s t) (1 - s^2)^(alpha - 1/2) ds, with R_alpha 1 = 1."""
    if not alpha > -0.5:
        raise ValueError("alpha must exceed -1/2")
    s, w = _rl_rule(alpha, n)
    t = np.asarray(t, dtype=float)
    vals = np.asarray(f(np.multiply.outer(t, s)), dtype=float)
    out = vals @ w
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RLInverse:
    """Collocation solution f of R_alpha f = h on [0, T], f = sum_j a_j P_j(t/T)."""
    alpha: float
    T: float
    coeffs: np.ndarray
    parity: str
    residual: float
    ill_posed: bool

    def _basis(self, t):
        y = np.asarray(t, dtype=float) / self.T
        arg = 2 * y * y - 1 if self.parity == "even" else 2 * y - 1
        return np.polynomial.chebyshev.chebvander(arg, len(self.coeffs) - 1)

    def __call__(self, t):
        out = self._basis(t) @ self.coeffs
        return float(np.reshape(out, -1)[0]) if np.ndim(t) == 0 else out


def rl_inverse_fit(h: Callable, alpha: float, T: float, degree: int = 32, parity: str = "even",
                   tol: float = 1e-7, n_rl: int = 80, strict: bool = False) -> RLInverse:
    """Solve R_alpha f = h on [0, T] by collocation at Chebyshev points.

    The basis is Chebyshev polynomials in (t/T)^2 (``parity='even'``) or in
    t/T (``'any'``). R_alpha maps each basis polynomial to a polynomial of
    the same degree, so the collocation matrix is the triangular action of
    R_alpha read at the nodes. The residual max |R_alpha f - h| is measured
    on a finer grid; ``strict`` raises when it exceeds ``tol``.
    """
    if parity not in ("even", "any"):
        raise ValueError("parity must be 'even' or 'any'")
    m = degree + 1
    theta = math.pi * (np.arange(m) + 0.5) / m
    z = np.cos(theta)[::-1]
    y = np.sqrt((1 + z) / 2) if parity == "even" else (1 + z) / 2
    tn = T * y
    probe = RLInverse(alpha, T, np.zeros(m), parity, 0.0, False)
    s, w = _rl_rule(alpha, n_rl)
    # R_alpha applied to each basis polynomial, read at the collocation nodes
    A = np.einsum("isj,s->ij", probe._basis(np.multiply.outer(tn, s)), w)
    hv = np.asarray(h(tn), dtype=float)
    coeffs = np.linalg.solve(A, hv)
    fit = RLInverse(alpha, T, coeffs, parity, 0.0, False)
    tc = np.linspace(0, T, 4 * m + 1)
    res = float(np.max(np.abs(riemann_liouville(fit, alpha, tc, n_rl) - np.asarray(h(tc), dtype=float))))
    ill = res > tol
    if ill and strict:
        raise IllPosedInversion(f"collocation residual {res:.3e} exceeds {tol:.1e}")
    return RLInverse(alpha, T, coeffs, parity, res, ill)


def riemann_liouville_inverse(h: Callable, alpha: float, t: float, T: Optional[float] = None,
                              **kw) -> float:
    """(R_alpha^{-1} h)(t) from a collocation fit on [0, max(T, t)]."""
    T = max(float(T or 0.0), float(t), 1e-12)
    return rl_inverse_fit(h, alpha, T, **kw)(t)


# ---------------------------------------------------------------------------
# spectral propagator


def _cos_mult(t, s):
    return np.cos(t * np.sqrt(2 * s))


def _sin_mult(t, s):
    z = t * np.sqrt(2 * s)
    small = z < 1e-3
    with np.errstate(divide="ignore", invalid="ignore"):
        big = np.sin(z) / np.sqrt(2 * s)
    return np.where(small, t * (1 - z * z / 6), big)


def _dt_cos_mult(t, s):
    q = np.sqrt(2 * s)
    return -q * np.sin(t * q)


def _dt_sin_mult(t, s):
    return np.cos(t * np.sqrt(2 * s))


def _spectral_terms(ctx, f, g, t, n, deriv_t=False):
    """Nodes s and weights of the propagated spectrum at time t."""
    lam = ctx.lambda1
    s_all, w_all = [], []
    for prof, mult in ((f, _dt_cos_mult if deriv_t else _cos_mult),
                       (g, _dt_sin_mult if deriv_t else _sin_mult)):
        if prof is None:
            continue
        hat = fourier_k1_radial(ctx, prof, n=n)
        s, w = radial_rule(hat, lam, n)
        s_all.append(s)
        w_all.append(w * mult(t, s))
    return np.concatenate(s_all), np.concatenate(w_all)


def wave_profile(ctx: DunklContext, f: RadialProfile, g: Optional[RadialProfile], r, t: float,
                 n: int = 160, deriv_t: bool = False, deriv_r: bool = False):
    """u(r, t) for radial data (or d/dt, d/dr of it) at radii r.

    u = H[cos(t sqrt(2 rho)) Hf + sin(t sqrt(2 rho))/sqrt(2 rho) Hg], H the
    k-Hankel transform on radial functions (its own inverse).
    """
    lam = ctx.lambda1
    r = np.atleast_1d(np.asarray(r, dtype=float))
    s, w = _spectral_terms(ctx, f, g, t, n, deriv_t)
    z = 2 * np.sqrt(np.outer(r, s))
    if deriv_r:
        with np.errstate(divide="ignore", invalid="ignore"):
            dz = np.where(r[:, None] > 0, np.sqrt(s[None, :] / np.where(r > 0, r, 1.0)[:, None]), 0.0)
        # at r = 0 the derivative of j(2 sqrt(r s)) in r is -s/(lam+1)
        K = np.where(r[:, None] > 0, bessel_j_norm_deriv(lam, z) * dz, -s[None, :] / (lam + 1))
    else:
        K = bessel_j_norm(lam, z)
    return (K @ w) * math.exp(-special.gammaln(lam + 1))


def wave_spectral(ctx: DunklContext, f: RadialProfile, g: Optional[RadialProfile], x, t: float,
                  n: int = 160) -> float:
    """Solution of u_tt = 2|x| Delta_k u, u(0) = f, u_t(0) = g, for radial data."""
    r = float(np.linalg.norm(np.asarray(x, dtype=float)))
    return float(wave_profile(ctx, f, g, r, t, n)[0])


def wave_pde_residual(ctx: DunklContext, f: RadialProfile, g: Optional[RadialProfile], x,
                      t: float, dt: float = 1e-3, h: float = 1e-3, n: int = 160) -> float:
    """|u_tt - 2|x| Delta_k u| by central differences in t and in space."""
    x = np.asarray(x, dtype=float)
    u = lambda tt: wave_spectral(ctx, f, g, x, tt, n)
    utt = (u(t + dt) - 2 * u(t) + u(t - dt)) / dt ** 2
    field = ScalarField(lambda p: wave_profile(ctx, f, g, np.linalg.norm(np.atleast_2d(p), axis=-1), t, n)[0])
    lap = dunkl_laplacian(ctx, field, x, h=h * max(1.0, float(np.linalg.norm(x)))).value
    return abs(utt - 2 * float(np.linalg.norm(x)) * lap)


def multiplier_energy(ctx: DunklContext, f: RadialProfile, t: float, n: int = 160,
                      n_r: int = 200, R: Optional[float] = None) -> float:
    """||H[cos(t sqrt(2.)) Hf]||^2 + ||H[sin(t sqrt(2.)) Hf]||^2 in L^2(r^lambda1 dr),
    computed in physical space; equals ||f||^2 for every t."""
    lam = ctx.lambda1
    if R is None:
        R = (60.0 + 2 * lam) / (f.rate or 1.0) + 2 * t * t
    rule = gauss_jacobi(n_r, 0.0, lam)
    r = R * (1 + rule.nodes) / 2
    wr = rule.weights * (R / 2) ** (lam + 1)
    uc = wave_profile(ctx, f, None, r, t, n)
    # H[sin(tq) Hf] decays slowly (sin(tq) is odd in q = sqrt(2 rho)); its
    # norm is the pairing of H[q sin(tq) Hf] with H[sin(tq)/q Hf], both of
    # which decay like the data
    v1 = wave_profile(ctx, f, None, r, t, n, deriv_t=True)  # -H[q sin(tq) Hf]
    v2 = wave_profile(ctx, None, f, r, t, n)  # H[sin(tq)/q Hf]
    return float(np.dot(wr, uc ** 2 - v1 * v2))


# ---------------------------------------------------------------------------
# mean-value route


def mean_route_fit(ctx: DunklContext, f0: Callable, x, T: float, degree: int = 32,
                   tol: float = 1e-7, **mean_kw) -> RLInverse:
    """Collocation fit of t -> u(x, t) = R^{-1}[tau -> M_f(x, tau^2/2)](t) on [0, T]."""
    x = np.asarray(x, dtype=float)
    rx = float(np.linalg.norm(x))
    n_u = mean_kw.pop("n_u", 32)
    b2, wb = _b2_distribution(ctx, x, mean_kw.pop("n_sphere", 16), mean_kw.pop("n_vk", 24),
                              mean_kw.pop("compress", 64))

    def h(tau):
        tau = np.asarray(tau, dtype=float)
        out = np.array([_mean_from_b2(ctx, f0, rx, 0.5 * tv * tv, b2, wb, n_u) for tv in tau.ravel()])
        return out.reshape(tau.shape)

    return rl_inverse_fit(h, ctx.lambda1, T, degree=degree, tol=tol)


def wave_from_mean(ctx: DunklContext, f0: Callable, x, t: float, T: Optional[float] = None,
                   **kw) -> float:
    """u(x, t) with g = 0 from the spherical means of f and the inverse Riemann-Liouville transform."""
    T = max(float(T or 0.0), float(t), 1e-12)
    return mean_route_fit(ctx, f0, x, T, **kw)(t)


def shell_outside_domain(x, t: float, center: float, width: float, margin: float = 0.2) -> bool:
    """True if the shell sqrt|xi| in (center - width, center + width) avoids
    every ball d(xi, gx) <= t/sqrt2 by ``margin``.

    Over the orbit, min_g d(xi, gx) = | sqrt|xi| - sqrt|x| | for sign flips,
    so the union of balls is the shell | sqrt|xi| - sqrt|x| | <= t/sqrt2.
    """
    rx = math.sqrt(float(np.linalg.norm(np.asarray(x, dtype=float))))
    rad = t / math.sqrt(2)
    lo, hi = max(rx - rad, 0.0), rx + rad
    return center - width >= hi + margin or (center + width <= lo - margin)


def huygens_check(ctx: DunklContext, f0: Callable, x, t: float, tol: float = 1e-6,
                  degree: int = 32):
    """(passed, |u(x, t)|) for g = 0 and data f0, through the mean route."""
    val = abs(wave_from_mean(ctx, f0, x, t, degree=degree))
    return val <= tol, val


# ---------------------------------------------------------------------------
# energy on the backward cone


def cone_energy(ctx: DunklContext, ut: Callable, grad_sq: Callable, x0, t0: float, t: float,
                n_rho: int = 32, n_phi: int = 64) -> float:
    """(1/2) int_{C_t} (u_t^2 + 2|x| |grad u|^2) |2x|^{-1} weight_k dx in the plane.

    C_t = {x : sqrt2 d(x, x0) <= t0 - t}. In the chart x = z^2 (complex
    squaring) d(x, x0) = |z - z0|, so C_t is a disc of radius (t0 - t)/sqrt2
    around z0 and dx = 4|z|^2 dA(z); the disc is integrated in polar
    coordinates about z0. ``ut`` and ``grad_sq`` map points (M, 2) to values.
    """
    if ctx.N != 2:
        raise ValueError("cone_energy is implemented in the plane")
    x0 = np.asarray(x0, dtype=float)
    r0 = float(np.linalg.norm(x0))
    if not math.sqrt(2 * r0) > t0:
        raise ValueError("the cone must not reach the origin: need sqrt(2|x0|) > t0")
    if not 0 <= t < t0:
        raise ValueError("t must lie in [0, t0)")
    z0 = np.sqrt(complex(x0[0], x0[1]))
    rad = (t0 - t) / math.sqrt(2)
    gl = gauss_legendre(n_rho)
    rho = rad * (1 + gl.nodes) / 2
    wrho = gl.weights * rad / 2 * rho
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    z = z0 + np.multiply.outer(rho, np.exp(1j * phi))
    xz = z * z
    pts = np.stack([xz.real.ravel(), xz.imag.ravel()], axis=1)
    r = np.abs(xz).ravel()
    dens = 0.5 * (np.asarray(ut(pts)) ** 2 / (2 * r) + np.asarray(grad_sq(pts))) * weight_k(ctx, pts)
    jac = 4 * np.abs(z).ravel() ** 2
    vals = (dens * jac).reshape(n_rho, n_phi)
    return float(wrho @ vals.sum(axis=1) * (2 * math.pi / n_phi))


def wave_energy(ctx: DunklContext, f: RadialProfile, g: Optional[RadialProfile], x0, t0: float,
                t: float, n: int = 160, **kw) -> float:
    """cone_energy of the spectral solution with radial data (f, g)."""
    def ut(p):
        return wave_profile(ctx, f, g, np.linalg.norm(p, axis=-1), t, n, deriv_t=True)

    def grad_sq(p):
        return wave_profile(ctx, f, g, np.linalg.norm(p, axis=-1), t, n, deriv_r=True) ** 2

    return cone_energy(ctx, ut, grad_sq, x0, t0, t, **kw)


# ---------------------------------------------------------------------------
# damped oracle


def hankel_damped_oracle(ctx: DunklContext, eps: float, r: float) -> float:
    """H(e^{-eps s})(r) = eps^-(lambda1+1) e^{-r/eps}."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return math.exp(-(ctx.lambda1 + 1) * math.log(eps) - r / eps)


def hankel_damped_quadrature(ctx: DunklContext, eps: float, r: float, n: int = 200) -> float:
    """The same transform by generalized Gauss-Laguerre quadrature."""
    lam = ctx.lambda1
    rule = gauss_laguerre(n, lam)
    s = rule.nodes / eps
    vals = bessel_j_norm(lam, 2 * np.sqrt(r * s))
    return float(np.dot(rule.weights, vals) * eps ** (-(lam + 1)) * math.exp(-special.gammaln(lam + 1)))
