"""The k-Hankel transform F_{k,1}: radial Hankel reduction, 1D quadrature and the
Laguerre-basis spectral action."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .dunkl import DunklContext, ScalarField, sphere_constant, sphere_rule
from .kernels import kernel_b1_batch
from .specfun import QuadratureError, bessel_j_norm, gauss_jacobi, gauss_laguerre, laguerre

__all__ = [
    "RadialProfile",
    "LaguerreExpansion",
    "psi",
    "psi_scaled",
    "radial_rule",
    "hankel_transform",
    "hankel_h1",
    "fourier_k1_radial",
    "fourier_k1_1d",
    "laguerre_packet",
    "harmonic_norm",
    "expand_laguerre",
    "partial_sum",
    "spectral_fourier",
    "fourier_of_measure",
    "weighted_norm",
]


@dataclass(frozen=True)
class RadialProfile:
    """Radial function r -> f0(r).

    Quadrature is driven by the decay hints: ``rate`` c means f0(r) e^{c r}
    grows at most polynomially (``smooth`` evaluates that factor directly
    when available); ``support`` R means f0 vanishes for r > R.
    """
    func: Callable
    rate: Optional[float] = None
    smooth: Optional[Callable] = None
    support: Optional[float] = None
    decay: str = "schwartz"
    closed_transform: Optional[Callable] = None

    def __call__(self, r):
        return self.func(np.asarray(r, dtype=float))

    @classmethod
    def exponential(cls, smooth: Callable, rate: float, **kw) -> "RadialProfile":
        return cls(lambda r: smooth(r) * np.exp(-rate * r), rate=rate, smooth=smooth, **kw)

    @classmethod
    def compact(cls, func: Callable, support: float, **kw) -> "RadialProfile":
        return cls(func, support=support, decay="compact", **kw)

    def smooth_factor(self, r):
        if self.smooth is not None:
            return self.smooth(r)
        return self.func(r) * np.exp(self.rate * r)


# ---------------------------------------------------------------------------
# basis


def _psi_log_norm(l: int, lam_m: float) -> float:
    return 0.5 * ((lam_m + 1) * math.log(2.0) + special.gammaln(l + 1) - special.gammaln(lam_m + l + 1))


def psi_scaled(ctx: DunklContext, l: int, m: int, r):
    """e^r psi_{l,m}(r): the polynomial part of the basis function."""
    lam_m = 2 * m + ctx.lambda1
    r = np.asarray(r, dtype=float)
    return math.exp(_psi_log_norm(l, lam_m)) * r ** m * laguerre(l, lam_m, 2 * r)


def psi(ctx: DunklContext, l: int, m: int, r):
    """Orthonormal radial basis function psi_{l,m} in L^2(r^{lambda1} dr)."""
    r = np.asarray(r, dtype=float)
    return psi_scaled(ctx, l, m, r) * np.exp(-r)


def harmonic_norm(ctx: DunklContext, j: int) -> float:
    """L^2(weight_k dsigma) norm of the degree-one harmonic x_j on the unit sphere."""
    return math.sqrt(sphere_constant(ctx) * (ctx.k[j] + 0.5) / (ctx.k_total + ctx.N / 2))


# ---------------------------------------------------------------------------
# radial quadrature


def radial_rule(profile: RadialProfile, lam: float, n: int, extra_rate: float = 0.0):
    """Nodes s and weights w with sum_j w_j h(s_j) ~ int_0^inf f0(s) h(s) s^lam ds.

    The weights already include f0. For exponential profiles the rule is
    generalized Gauss-Laguerre at rate c + extra_rate, and ``h`` must then be
    passed pre-multiplied by e^{extra_rate s}.
    """
    if profile.support is not None or (profile.smooth is None and extra_rate == 0.0):
        # compact profiles, and sampled profiles whose values carry absolute
        # rounding noise that e^{c s} would amplify: truncate where e^{-c s} is negligible
        if profile.support is not None:
            R = float(profile.support)
        elif profile.rate is not None:
            R = (40.0 + 2 * max(lam, 0.0)) / profile.rate
        else:
            raise ValueError("profile needs a rate or a support hint for quadrature")
        rule = gauss_jacobi(n, 0.0, lam)
        s = R * (1 + rule.nodes) / 2
        w = rule.weights * (R / 2) ** (lam + 1) * profile.func(s)
        return s, w
    if profile.rate is None:
        raise ValueError("profile needs a rate or a support hint for quadrature")
    beta = profile.rate + extra_rate
    rule = gauss_laguerre(n, lam)
    s = rule.nodes / beta
    w = rule.weights * beta ** (-(lam + 1)) * profile.smooth_factor(s)
    return s, w


def hankel_transform(lam: float, profile: RadialProfile, rho, n: int = 160,
                     check: bool = False, tol: float = 1e-9) -> np.ndarray:
    """H_lam f(rho) = Gamma(lam+1)^-1 int f(s) j_lam(2 sqrt(rho s)) s^lam ds."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))

    def run(order):
        s, w = radial_rule(profile, lam, order)
        J = bessel_j_norm(lam, 2 * np.sqrt(np.outer(rho, s)))
        return (J @ w) * math.exp(-special.gammaln(lam + 1))

    val = run(n)
    if check:
        alt = run(max(40, (3 * n) // 4))
        err = np.max(np.abs(alt - val))
        if err > tol * max(1.0, np.max(np.abs(val))):
            raise QuadratureError(f"Hankel quadrature unconverged, estimate {err:.3e}")
    return val


def hankel_h1(ctx: DunklContext, profile: RadialProfile, r, **kw) -> np.ndarray:
    return hankel_transform(ctx.lambda1, profile, r, **kw)


def fourier_k1_radial(ctx: DunklContext, profile: RadialProfile, n: int = 160) -> RadialProfile:
    """F_{k,1} of a radial function as a radial profile.

    On radial functions c_{k,1} d_{k,1} = 1/Gamma(lambda1+1), so F_{k,1}
    reduces to H_{lambda1}. The result inherits the decay hint of the input,
    which is exact for Laguerre packets (their transforms are packets too).
    """
    if isinstance(profile.closed_transform, RadialProfile):
        hat = profile.closed_transform
        return RadialProfile(hat.func, rate=hat.rate, smooth=hat.smooth, support=hat.support,
                             decay=hat.decay, closed_transform=profile)
    if profile.closed_transform is not None:
        g = profile.closed_transform
        return RadialProfile(g, rate=profile.rate, support=None, decay=profile.decay,
                             closed_transform=profile.func)
    fn = lambda rho: hankel_h1(ctx, profile, np.asarray(rho, dtype=float), n=n).reshape(np.shape(rho))
    return RadialProfile(fn, rate=profile.rate if profile.rate is not None else 1.0,
                         decay=profile.decay)


def weighted_norm(ctx: DunklContext, profile: RadialProfile, n: int = 160) -> float:
    """sqrt(int |f0|^2 r^{lambda1} dr)."""
    if profile.support is not None:
        s, w = radial_rule(profile, ctx.lambda1, n)
        return math.sqrt(float(np.dot(w, profile(s))))
    sq = RadialProfile.exponential(lambda r: profile.smooth_factor(r) ** 2, 2 * profile.rate)
    s, w = radial_rule(sq, ctx.lambda1, n)
    return math.sqrt(float(w.sum()))


def laguerre_packet(ctx: DunklContext, coeffs, m: int = 0) -> RadialProfile:
    """sum_l coeffs[l] psi_{l,m}; its transform is the sign-flipped packet."""
    coeffs = np.asarray(coeffs, dtype=float)
    signs = (-1.0) ** (np.arange(len(coeffs)) + m)

    def smooth_of(c):
        return lambda r: sum(cl * psi_scaled(ctx, l, m, r) for l, cl in enumerate(c) if cl != 0)

    sm, sm_hat = smooth_of(coeffs), smooth_of(coeffs * signs)
    # the transform is again a packet; keeping it as a profile keeps its smooth factor
    hat = RadialProfile.exponential(sm_hat, 1.0)
    return RadialProfile.exponential(sm, 1.0, closed_transform=None if m else hat)


# ---------------------------------------------------------------------------
# one-dimensional transform


def fourier_k1_1d(ctx: DunklContext, f: Callable, xi: float, rate: Optional[float] = None,
                  support: Optional[float] = None, n: int = 160) -> complex:
    """c_{k,1} int f(y) B_{k,1}(xi, y) |sqrt2 y|^{2k} |y|^{-1} dy on the real line.

    ``f`` maps real arrays to values. The integral is split at 0 and each half
    uses Gauss-Laguerre (``rate`` hint, f(y) e^{rate|y|} smooth) or, failing
    that, adaptive quadrature with the algebraic endpoint weight.
    """
    if ctx.N != 1:
        raise ValueError("fourier_k1_1d requires N = 1")
    k = ctx.k[0]
    lam = 2 * k - 1
    pref = ctx.c_k1 * 2.0 ** k
    xi_pt = np.array([[float(xi)]])

    def halves(s):
        s = np.asarray(s, dtype=float)
        bp = kernel_b1_batch(ctx, xi_pt, s[:, None])
        bm = kernel_b1_batch(ctx, xi_pt, -s[:, None])
        return f(s) * bp + f(-s) * bm

    if rate is not None:
        rule = gauss_laguerre(n, lam)
        s = rule.nodes / rate
        val = np.dot(rule.weights * rate ** (-(lam + 1)) * np.exp(rule.nodes), halves(s))
        return complex(pref * val)
    g = lambda s: float(halves(np.array([s]))[0])
    if support is not None:
        val, _ = integrate.quad(g, 0, float(support), weight="alg", wvar=(lam, 0),
                                limit=400, epsabs=1e-12)
    else:
        val, _ = integrate.quad(lambda s: g(s) * s ** lam, 0, np.inf, limit=400, epsabs=1e-12)
    return complex(pref * val)


# ---------------------------------------------------------------------------
# Laguerre expansions


@dataclass(frozen=True)
class LaguerreExpansion:
    """Coefficients c[(l, m, j)] against psi_{l,m}(r) p_{m,j}(x').

    For ``radial`` expansions only m = 0 occurs and the basis is psi_{l,0}
    in L^2(r^{lambda1} dr). Otherwise p_{0,0} = 1/sqrt(d_k1) and
    p_{1,j} = x_j/|x_j|_sphere are unit vectors on the weighted sphere.
    """
    ctx: DunklContext
    coeffs: dict
    L_max: int
    M_max: int
    radial: bool = True
    ill_conditioned: bool = False

    def energy(self, L: Optional[int] = None) -> float:
        return float(sum(abs(c) ** 2 for (l, m, j), c in self.coeffs.items()
                         if L is None or l <= L))

    def evaluate_radial(self, r, L: Optional[int] = None):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        for (l, m, j), c in self.coeffs.items():
            if m == 0 and (L is None or l <= L):
                out = out + c * psi(self.ctx, l, 0, r)
        return out.real if np.all(np.isreal(out)) else out

    def evaluate(self, x, L: Optional[int] = None):
        x = np.asarray(x, dtype=float)
        if self.radial:
            return self.evaluate_radial(np.linalg.norm(x, axis=-1), L)
        r = np.linalg.norm(x, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        d = sphere_constant(self.ctx)
        out = np.zeros(r.shape, dtype=complex)
        for (l, m, j), c in self.coeffs.items():
            if L is not None and l > L:
                continue
            if m == 0:
                ang = 1 / math.sqrt(d)
            else:
                ang = x[..., j] / safe / harmonic_norm(self.ctx, j)
            out = out + c * psi(self.ctx, l, m, r) * ang
        return out.real if np.all(np.isreal(out)) else out


def expand_laguerre(ctx: DunklContext, f, L_max: int, M_max: int = 0, rate: Optional[float] = None,
                    support: Optional[float] = None, n: Optional[int] = None,
                    n_sphere: int = 16) -> LaguerreExpansion:
    """Project ``f`` (a RadialProfile, or a callable on points with decay hints)."""
    if M_max > 1:
        raise ValueError("only harmonics of degree 0 and 1 are supported")
    lam1 = ctx.lambda1
    ill = bool(L_max > 200 and 2 * M_max + lam1 > 10)
    coeffs = {}
    if isinstance(f, RadialProfile):
        if n is None:
            n = min(200, 2 * L_max + 16) if f.support is None else 2 * L_max + 200
        s, w = radial_rule(f, lam1, n, extra_rate=1.0 if f.support is None else 0.0)
        for l in range(L_max + 1):
            basis = psi_scaled(ctx, l, 0, s) if f.support is None else psi(ctx, l, 0, s)
            coeffs[(l, 0, 0)] = float(np.dot(w, basis))
        return LaguerreExpansion(ctx, coeffs, L_max, 0, True, ill)
    # general field: project onto the sphere, then radially
    nodes, sw = sphere_rule(ctx, n_sphere)
    d = sphere_constant(ctx)
    harmonics = [(0, 0, np.full(len(sw), 1 / math.sqrt(d)))]
    if M_max >= 1:
        harmonics += [(1, j, nodes[:, j] / harmonic_norm(ctx, j)) for j in range(ctx.N)]
    if support is not None:
        if n is None:
            n = 2 * L_max + 200
        rule = gauss_jacobi(n, 0.0, lam1)
        s = support * (1 + rule.nodes) / 2
        rw = rule.weights * (support / 2) ** (lam1 + 1)
        scale = lambda l, m: psi(ctx, l, m, s)
        fe = lambda vals: vals
    elif rate is not None:
        if n is None:
            n = min(200, 2 * L_max + 16)
        beta = rate + 1.0
        rule = gauss_laguerre(n, lam1)
        s = rule.nodes / beta
        rw = rule.weights * beta ** (-(lam1 + 1))
        scale = lambda l, m: psi_scaled(ctx, l, m, s)
        fe = lambda vals: vals * np.exp(rate * s)[:, None]
    else:
        raise ValueError("give a rate or support hint")
    pts = s[:, None, None] * nodes[None, :, :]
    vals = fe(np.asarray(f(pts), dtype=float))  # (n_r, n_sphere)
    for m, j, hv in harmonics:
        ang = d * (vals @ (sw * hv))  # sphere integral against weight_k dsigma
        for l in range(L_max + 1):
            coeffs[(l, m, j)] = float(np.dot(rw * scale(l, m), ang))
    return LaguerreExpansion(ctx, coeffs, L_max, M_max, False, ill)


def partial_sum(expansion: LaguerreExpansion, L: int) -> ScalarField:
    return ScalarField(lambda x: expansion.evaluate(x, L))


def spectral_fourier(expansion: LaguerreExpansion) -> LaguerreExpansion:
    """Exact action of F_{k,1}: c_{l,m} -> (-1)^{l+m} c_{l,m}."""
    out = {(l, m, j): c * (-1.0) ** (l + m) for (l, m, j), c in expansion.coeffs.items()}
    return LaguerreExpansion(expansion.ctx, out, expansion.L_max, expansion.M_max,
                             expansion.radial, expansion.ill_conditioned)


def fourier_of_measure(ctx: DunklContext, measure, xi) -> float:
    """sum_j w_j B_{k,1}(xi, y_j) for a discrete measure on R^N."""
    pts = np.asarray(measure.nodes, dtype=float).reshape(len(measure.weights), ctx.N)
    vals = kernel_b1_batch(ctx, np.asarray(xi, dtype=float)[None, :], pts)
    return float(np.dot(measure.weights, vals))
