"""Spherical means M_f(x, t), the representing measure sigma_{x,t} and the
product formula it satisfies.

sigma_{x,t} is assembled from its density against weight_{k,1}: pairing the
radial translation formula with a thin shell at radius t gives, on the ray
xi = s^2 omega and for an intertwiner node eta,

    C / t^lambda1 * (1 - u*^2)^nu * s^(2 lambda1) / b ds,
    b^2 = (|x| + <eta, omega>)/2,  u* = (|x| + s^2 - t) / (2 s b),

supported where (s - b)^2 <= D = t - |x| + b^2. The s-integral is done by
Gauss-Jacobi(nu, nu) on that interval. When t < |x| the mass switches on
like D^(nu+1/2) across a hyperplane in eta; one intertwiner coordinate is
split at that root so the quadrature stays Gaussian.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .dunkl import DunklContext, group_elements, sphere_constant, sphere_rule, vk_rule
from .kernels import heat_kernel, kernel_b1_batch
from .specfun import bessel_j_norm, discrete_gauss_rule, discrete_gauss_rules, gauss_jacobi, gauss_laguerre
from .transforms import RadialProfile, fourier_k1_radial, hankel_h1, radial_rule
from .translation import (DiscreteMeasure, _u_rule, bessel_product_measure, translate_1d,
                          translation_constant)

__all__ = [
    "sigma_measure",
    "spherical_mean",
    "radial_mean",
    "mean_multiplier_route",
    "multiplier_residual",
    "PositivityReport",
    "positivity_scan",
    "heat_mean",
    "product_formula_residual",
    "equivariance_check",
]


# ---------------------------------------------------------------------------
# sigma_{x,t}


def _rank_one(kv: float, n: int):
    if kv == 0:
        return np.ones(1), np.ones(1)
    r = gauss_jacobi(n, kv - 1.0, kv)
    return r.nodes, r.weights / r.weights.sum()


_NEAR_EDGE = 0.25


def _side_rule(root, above, kv: float, ex, n: int):
    """Rank-one intertwiner density restricted to tau > root (``above``) or tau < root.

    The integrand is assumed to vanish like |tau - root|^ex at the root; that
    factor is absorbed into the Gauss-Jacobi weight and divided out of the
    returned weights. Arrays broadcast over the leading shape of ``root``.
    """
    root = np.asarray(root, dtype=float)
    above = np.broadcast_to(above, root.shape)
    ex = np.broadcast_to(np.asarray(ex, dtype=float), root.shape)
    full = gauss_jacobi(n, kv - 1.0, kv)
    Z = full.weights.sum()
    tau = np.zeros(root.shape + (n,))
    w = np.zeros(root.shape + (n,))
    whole = (above & (root <= -1)) | (~above & (root >= 1))
    empty = (above & (root >= 1)) | (~above & (root <= -1))
    tau[whole] = full.nodes
    w[whole] = full.weights / Z
    # when the root sits within a small distance d of the opposite box edge,
    # (1 -+ tau)^kv is nearly singular at the root; map y = d (e^sigma - 1)
    d = np.where(above, root + 1, 1 - root)
    span = np.where(above, 1 - root, root + 1)
    near = ~whole & ~empty & (d < _NEAR_EDGE * span)
    for e in np.unique(ex):
        for side in (True, False):
            sel = near & (above == side) & (ex == e)
            if not np.any(sel):
                continue
            far_exp = kv - 1.0 if side else kv
            rule = gauss_jacobi(n, far_exp, e)
            dd = d[sel][:, None]
            smax = np.log1p(span[sel][:, None] / dd)
            sig = smax * (1 + rule.nodes) / 2
            y = dd * np.expm1(sig)
            tt = root[sel][:, None] + (y if side else -y)
            dens = (1 - tt) ** (kv - 1) * (1 + tt) ** kv / Z
            jac = dd * np.exp(sig)
            tau[sel] = tt
            w[sel] = (rule.weights * (smax / 2) ** (1 + far_exp + e) * dens * jac
                      / (sig ** e * (smax - sig) ** far_exp))
    for e in np.unique(ex):
        up = above & ~whole & ~empty & ~near & (ex == e)
        if np.any(up):
            rule = gauss_jacobi(n, kv - 1.0, e)
            r = root[up][:, None]
            tt = r + (1 - r) * (1 + rule.nodes) / 2
            tau[up] = tt
            w[up] = rule.weights / Z * ((1 - r) / 2) ** (kv + e) * (1 + tt) ** kv / (tt - r) ** e
        lo = ~above & ~whole & ~empty & ~near & (ex == e)
        if np.any(lo):
            rule = gauss_jacobi(n, e, kv)
            r = root[lo][:, None]
            tt = -1 + (r + 1) * (1 + rule.nodes) / 2
            tau[lo] = tt
            w[lo] = rule.weights / Z * ((r + 1) / 2) ** (kv + e + 1) * (1 - tt) ** (kv - 1) / (r - tt) ** e
    return tau, w


def _safe_root(num, den, tiny):
    """num/den, sent to -inf (whole interval valid) or +inf (empty) when den ~ 0."""
    small = np.abs(den) <= tiny
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(small, np.where(num < 0, -np.inf, np.inf), num / np.where(small, 1.0, den))
    return r, ~small & (den < 0)


_GRADE = 3


def _piece_rule(kv: float, lo, hi, e_lo, e_hi, n: int, graded=None):
    """Rank-one intertwiner density on [lo, hi] (arrays), Gauss-Jacobi with
    exponents e_lo, e_hi at the ends; those factors are divided out of the
    returned weights. Empty pieces (lo >= hi) get zero weight.

    ``graded`` ("lo" or "hi") marks an end where the integrand is smooth plus
    a fractional power: nodes are mapped as tau = end +- L v^3 so the power
    becomes a high-order one; that end's exponent is ignored.
    """
    Z = gauss_jacobi(n, kv - 1.0, kv).weights.sum()
    lo, hi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (lo, hi)))
    e_lo, e_hi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (e_lo, e_hi)))
    if graded == "lo":
        e_lo = np.zeros_like(e_lo)
    elif graded == "hi":
        e_hi = np.zeros_like(e_hi)
    tau = np.zeros(lo.shape + (n,))
    w = np.zeros(lo.shape + (n,))
    live = hi > lo
    for el, eh in set(zip(e_lo[live].tolist(), e_hi[live].tolist())):
        sel = live & (e_lo == el) & (e_hi == eh)
        p, q = lo[sel][:, None], hi[sel][:, None]
        if graded is None:
            rule = gauss_jacobi(n, eh, el)
            half = (q - p) / 2
            tt = p + half * (1 + rule.nodes)
            jac = half ** (1 + el + eh) / ((tt - p) ** el * (q - tt) ** eh)
        else:
            e = eh if graded == "lo" else el
            rule = gauss_jacobi(n, e, 0.0)
            v = (1 + rule.nodes) / 2
            L = q - p
            tt = p + L * v ** _GRADE if graded == "lo" else q - L * v ** _GRADE
            jac = 0.5 ** (1 + e) * L * _GRADE * v ** (_GRADE - 1) / (1 - v) ** e
        dens = (1 - tt) ** (kv - 1) * (1 + tt) ** kv / Z
        tau[sel] = tt
        w[sel] = rule.weights * jac * dens
    return tau, w


def _rest_rule(ctx: DunklContext, i0: int, j: int, c, cj, base: float, a: float, tiny: float,
               n: int):
    """Nodes (P, 2n) and weights for the second intertwiner coordinate in the plane.

    With c = x_i0 omega_i0 and cj = x_j omega_j, the i0 interval is nonempty
    once tau_j cj exceeds base - |c| and is all of [-1, 1] once it exceeds
    base + |c|. The integrated density vanishes like a power at the first
    point and loses smoothness at the second, so the valid tau_j interval
    is cut at both.
    """
    kv, k0 = ctx.k[j], ctx.k[i0]
    P = len(c)
    small_c = np.abs(c) <= tiny
    ex_on = np.where(small_c, a, k0 + a + (c < 0))
    on, _ = _safe_root(base - np.abs(c), cj, tiny)
    full, _ = _safe_root(base + np.abs(c), cj, tiny)
    up = cj > tiny
    down = cj < -tiny
    flat = ~up & ~down
    # valid interval [lo, hi] and its end exponents
    lo = np.where(up, np.maximum(on, -1.0), -1.0)
    hi = np.where(down, np.minimum(on, 1.0), 1.0)
    e_lo = np.where(up & (on > -1), ex_on, kv)
    e_hi = np.where(down & (on < 1), ex_on, kv - 1.0)
    # flat rays: rest term ~ 0, valid everywhere or nowhere
    dead = flat & ~(base - np.abs(c) < 0)
    lo = np.where(dead, 1.0, lo)
    hi = np.where(dead, 1.0, hi)
    # interior smoothness break
    cut = ~flat & ~small_c & (full > lo) & (full < hi)
    mid = np.where(cut, full, hi)
    t0, w0 = _piece_rule(kv, lo, hi, e_lo, e_hi, n)
    t1, w1 = _piece_rule(kv, lo, mid, e_lo, e_hi, n, graded="hi")
    t2, w2 = _piece_rule(kv, np.where(cut, mid, hi), hi, e_lo, e_hi, n, graded="lo")
    t1 = np.where(cut[:, None], t1, t0)
    w1 = np.where(cut[:, None], w1, w0)
    return np.concatenate([t1, t2], axis=1), np.concatenate([w1, w2], axis=1)


def _eta_nodes(ctx: DunklContext, x, t: float, omega, n_vk: int):
    """Intertwiner nodes eta (P, Q, N) and weights (P, Q) for every direction omega.

    For t < |x| only eta with <eta, omega> >= |x| - 2t carry mass and the
    density switches on like (distance)^(nu+1/2). The coordinate with the
    largest |x_i| is split at that root; for N = 2 the other coordinate is
    split as well (see _rest_rule).
    """
    x = np.asarray(x, dtype=float)
    P = len(omega)
    rx = float(np.linalg.norm(x))
    active = [i for i, kv in enumerate(ctx.k) if kv > 0 and x[i] != 0]
    if not (t < rx and active):
        T, W = vk_rule(ctx, n_vk)
        eta = np.broadcast_to(T * x, (P,) + T.shape)
        return eta, np.broadcast_to(W, (P, len(W)))
    i0 = max(active, key=lambda i: abs(x[i]))
    k0 = ctx.k[i0]
    a = ctx.translation_exponent + 0.5
    others = [j for j in range(ctx.N) if j != i0]
    tiny = 1e-14 * max(rx, 1.0)
    c = x[i0] * omega[:, i0]  # (P,)
    base = rx - 2 * t

    if ctx.N == 2 and others[0] in active:
        j = others[0]
        TR, WR = _rest_rule(ctx, i0, j, c, x[j] * omega[:, j], base, a, tiny, n_vk)
        TR = TR[..., None]
    else:
        rules = [_rank_one(ctx.k[j], n_vk) for j in others]
        if others:
            T0 = np.array(list(itertools.product(*[r[0] for r in rules])))
            W0 = np.prod(np.array(list(itertools.product(*[r[1] for r in rules]))), axis=1)
        else:
            T0, W0 = np.zeros((1, 0)), np.ones(1)
        TR = np.broadcast_to(T0, (P,) + T0.shape)
        WR = np.broadcast_to(W0, (P, len(W0)))
    rest = np.einsum("pqj,j,pj->pq", TR, x[others], omega[:, others]) if others else np.zeros((P, 1))
    root, below = _safe_root(base - rest, c[:, None] * np.ones_like(rest), tiny)
    tau, wt = _side_rule(root, ~below, k0, a, n_vk)  # (P, Q, n)
    eta = np.empty(rest.shape + (n_vk, ctx.N))
    for jj, j in enumerate(others):
        eta[..., j] = (TR[..., jj] * x[j])[..., None]
    eta[..., i0] = tau * x[i0]
    Wfull = WR[..., None] * wt
    return eta.reshape(P, -1, ctx.N), Wfull.reshape(P, -1)


def _ray_atoms(ctx: DunklContext, x, t: float, omega, n_vk: int, n_s: int):
    """Per-direction atoms: s (P, M) and weights (P, M) with xi = s^2 omega."""
    x = np.asarray(x, dtype=float)
    rx = float(np.linalg.norm(x))
    nu = ctx.translation_exponent
    lam1 = ctx.lambda1
    eta, W = _eta_nodes(ctx, x, t, omega, n_vk)
    b2 = np.clip((rx + np.einsum("pqn,pn->pq", eta, omega)) / 2, 0, None)
    D = t - rx + b2
    b = np.sqrt(b2)
    sqD = np.sqrt(np.clip(D, 0, None))
    h = np.minimum(b, sqD)
    mid = np.maximum(b, sqD)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(b > 0, h / np.where(b > 0, b, 1.0), 1.0)
    # on split coordinates the eta weight lacks (tau - root)^(nu+1/2); the
    # factor (h/b)^(2nu+1) = (D/b^2)^(nu+1/2) supplies it, D being linear in tau
    fac = ratio ** (2 * nu + 1)
    alive = (D > 0) & (W > 0)
    u, wu = _u_rule(ctx, n_s)
    s = mid[..., None] + h[..., None] * u
    s1 = (mid - h)[..., None]
    s2 = (mid + h)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        shape = ((s + s1) * (s + s2) / (4 * s * s)) ** nu
        wts = (W * fac)[..., None] * wu * shape * (s * s / t) ** lam1
    wts = np.where(alive[..., None] & (s > 0), wts, 0.0)
    return s.reshape(len(omega), -1), np.nan_to_num(wts.reshape(len(omega), -1))


def _circle_rule(ctx: DunklContext, x, t: float, n: int, panel_scale: float = 0.5):
    """Direction rule on the unit circle (probability for weight_k dsigma / d_k1)
    adapted to sigma_{x,t}: each quadrant is split at the angles where the
    hyperplane <eta, omega> = |x| - 2t passes a vertex of the intertwiner box,
    across which the direction density loses smoothness, and axis endpoints
    carry their Jacobi exponents."""
    ax = np.abs(np.asarray(x, dtype=float))
    rx = float(np.linalg.norm(ax))
    c0 = abs(rx - 2 * t)
    breaks = [0.0, math.pi / 2]
    if rx > 0 and c0 < rx:
        # the support hyperplane crosses a vertex of the intertwiner box where
        # |x1| cos th +- |x2| sin th = +-c0, i.e. rx cos(th -+ phi) = +-c0
        phi = math.atan2(ax[1], ax[0])
        for sgn in (1.0, -1.0):
            delta = math.acos(sgn * c0 / rx)
            for th in (phi - delta, phi + delta, -phi - delta, -phi + delta):
                if 1e-12 < th < math.pi / 2 - 1e-12:
                    breaks.append(th)
    breaks = sorted(breaks)
    # sigma concentrates near the directions of the orbit of x as t/|x| -> 0;
    # subdivide so each panel resolves a peak of width ~ sqrt(t/|x|)
    width = math.sqrt(t / rx) if rx > t else 1.0
    fine = [breaks[0]]
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        m = max(1, math.ceil((hi - lo) / (panel_scale * width)))
        fine += list(lo + (hi - lo) * np.arange(1, m + 1) / m)
    fine[-1] = math.pi / 2
    breaks = fine
    k1, k2 = ctx.k
    th, wt = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        beta = 2 * k2 if lo == 0.0 else 0.0   # |sin|^{2 k2} vanishes at 0
        alpha = 2 * k1 if hi == math.pi / 2 else 0.0
        rule = gauss_jacobi(n, alpha, beta)
        half = (hi - lo) / 2
        tt = lo + half * (1 + rule.nodes)
        dens = np.abs(math.sqrt(2) * np.cos(tt)) ** (2 * k1) * np.abs(math.sqrt(2) * np.sin(tt)) ** (2 * k2)
        sing = (hi - tt) ** alpha * (tt - lo) ** beta
        th.append(tt)
        wt.append(rule.weights * half ** (1 + alpha + beta) * dens / sing)
    th = np.concatenate(th)
    wt = np.concatenate(wt)
    wt = wt / (sphere_constant(ctx) / 4)
    nodes, weights = [], []
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            nodes.append(np.stack([s1 * np.cos(th), s2 * np.sin(th)], axis=1))
            weights.append(wt / 4)
    return np.concatenate(nodes), np.concatenate(weights)


def _direction_rule(ctx: DunklContext, x, t: float, n: int):
    if ctx.N == 2 and ctx.group == "sign_flips":
        return _circle_rule(ctx, x, t, n)
    return sphere_rule(ctx, n)


def sigma_measure(ctx: DunklContext, x, t: float, n_sphere: int = 16, n_vk: int = 24,
                  n_s: int = 12, per_ray: int = 24, method: str = "auto",
                  n_phi: int = 64) -> DiscreteMeasure:
    """Representing measure of f -> M_f(x, t) as point masses in R^N.

    ``method="compound"`` compounds a direction rule with the radial
    representing measure; atoms on each ray are compressed to a
    ``per_ray``-point Gauss rule of the ray's discrete measure in s
    (positive weights, nodes inside the support interval).
    ``method="explicit"`` (N = 1 only) returns the measure of the explicit
    one-dimensional mean with ``n_phi`` angle nodes. ``"auto"`` picks the
    explicit measure in 1D, where the compound rule degrades near |x| = t.
    """
    if method not in ("auto", "compound", "explicit"):
        raise ValueError(f"unknown method {method!r}")
    if method == "explicit" and ctx.N != 1:
        raise ValueError("the explicit measure requires N = 1")
    x = np.asarray(x, dtype=float)
    rx = float(np.linalg.norm(x))
    if t < 0:
        raise ValueError("t must be nonnegative")
    lo_b = abs(math.sqrt(rx) - math.sqrt(t))
    hi_b = math.sqrt(rx) + math.sqrt(t)
    if t == 0:
        return DiscreteMeasure.build(x[None, :], np.ones(1), (lo_b, hi_b))
    if ctx.N == 1 and method != "compound":
        mu = translate_1d(ctx, None, float(x[0]), t, n_phi=n_phi, return_measure=True)
        return DiscreteMeasure.build(mu.nodes.reshape(-1, 1), mu.weights, (lo_b, hi_b))
    omega, wo = _direction_rule(ctx, x, t, n_sphere)
    s, w = _ray_atoms(ctx, x, t, omega, n_vk, n_s)
    sn, wn = discrete_gauss_rules(s, w, per_ray)
    keep = wn > 0
    pts = (sn ** 2)[..., None] * omega[:, None, :]
    wts = wn * wo[:, None]
    return DiscreteMeasure.build(pts[keep], wts[keep], (lo_b, hi_b))


# ---------------------------------------------------------------------------
# spherical means


def _as_radial(f):
    return isinstance(f, RadialProfile) or getattr(f, "radial", False)


def radial_mean(ctx: DunklContext, f0: Callable, x, t: float, n_sphere: int = 16, n_vk: int = 24,
                n_u: int = 32, compress: Optional[int] = None) -> float:
    """M_f(x, t) for radial f = f0(|.|): sphere average of the radial translation.

    Only b^2 = (|x| + <eta, omega>)/2 enters, so the (omega, eta) product is
    first reduced to its distribution of b^2 (optionally Gauss-compressed).
    """
    b2, wb = _b2_distribution(ctx, x, n_sphere, n_vk, compress)
    return float(_mean_from_b2(ctx, f0, float(np.linalg.norm(x)), t, b2, wb, n_u))


def _b2_distribution(ctx, x, n_sphere, n_vk, compress=None):
    x = np.asarray(x, dtype=float)
    omega, wo = sphere_rule(ctx, n_sphere)
    T, W = vk_rule(ctx, n_vk)
    b2 = np.clip((np.linalg.norm(x) + (T * x) @ omega.T) / 2, 0, None)  # (Q, P)
    wb = W[:, None] * wo[None, :]
    b2, wb = b2.ravel(), wb.ravel()
    if compress:
        # the mean is a smooth function of b (not of b^2): compress in b
        b, wb = discrete_gauss_rule(np.sqrt(b2), wb, compress)
        b2 = np.clip(b, 0, None) ** 2
    return b2, wb


def _mean_from_b2(ctx, f0, rx, t, b2, wb, n_u):
    u, wu = _u_rule(ctx, n_u)
    arg = rx + t - 2 * np.sqrt(t * b2)[:, None] * u[None, :]
    return wb @ f0(np.clip(arg, 0, None)) @ wu


def mean_multiplier_route(ctx: DunklContext, profile: RadialProfile, x, t: float,
                          n: int = 160) -> float:
    """M_f(x, t) for a radial f through its transform:
    Gamma(lambda1+1)^-1 int j(2 sqrt(|x| r)) j(2 sqrt(t r)) Ff(r) r^lambda1 dr."""
    lam = ctx.lambda1
    rx = float(np.linalg.norm(x))
    if profile.closed_transform is None:
        raise ValueError("multiplier route needs the closed transform of the profile")
    hat = fourier_k1_radial(ctx, profile, n)
    s, w = radial_rule(hat, lam, n)
    vals = bessel_j_norm(lam, 2 * np.sqrt(rx * s)) * bessel_j_norm(lam, 2 * np.sqrt(t * s))
    return float(np.dot(w, vals) / math.gamma(lam + 1))


def spherical_mean(ctx: DunklContext, f, x, t: float, route: Optional[str] = None, **kw) -> float:
    """M_f(x, t).

    Routes: ``radial`` (f a RadialProfile or radius function flagged radial),
    ``multiplier`` (radial Laguerre packet with a closed transform),
    ``sigma`` (any f on points, through the representing measure) and, for
    N = 1, ``explicit`` (the closed 1D formula).
    """
    x = np.asarray(x, dtype=float)
    if t == 0:
        if _as_radial(f):
            return float(f(np.array([np.linalg.norm(x)]))[0])
        return float(np.asarray(f(x[None, :])).ravel()[0])
    if route is None:
        if _as_radial(f):
            route = "radial"
        elif ctx.N == 1:
            route = "explicit"
        else:
            route = "sigma"
    if route == "radial":
        return radial_mean(ctx, f, x, t, **kw)
    if route == "multiplier":
        return mean_multiplier_route(ctx, f, x, t, **kw)
    if route == "explicit":
        g = lambda s: np.asarray(f(np.asarray(s, dtype=float)[:, None]), dtype=float)
        return translate_1d(ctx, g, float(x[0]), t, **kw)
    if route == "sigma":
        mu = sigma_measure(ctx, x, t, **kw)
        return float(np.dot(mu.weights, f(mu.nodes)))
    raise ValueError(f"unknown route {route!r}")


def multiplier_residual(ctx: DunklContext, profile: RadialProfile, t: float, xi_grid,
                        n_r: int = 200, R: Optional[float] = None) -> float:
    """max |F(M_f(., t))(xi) - j(2 sqrt(t |xi|)) F f(xi)| over the grid.

    M_f(., t) is tabulated by the radial route and transformed by quadrature
    on [0, R], independently of the closed transform of f.
    """
    lam = ctx.lambda1
    if R is None:
        R = (40.0 + 2 * lam) / (profile.rate or 1.0) + t
    rule = gauss_jacobi(n_r, 0.0, lam)
    r = R * (1 + rule.nodes) / 2
    wr = rule.weights * (R / 2) ** (lam + 1)
    unit = np.zeros(ctx.N)
    unit[0] = 1.0
    b2, wb = _b2_distribution(ctx, unit, 16, 24, compress=48)
    # for x = r e_1 the b^2 atoms scale linearly with r
    Mt = np.array([_mean_from_b2(ctx, profile, ri, t, b2 * ri, wb, 48) for ri in r])
    xi = np.atleast_1d(np.asarray(xi_grid, dtype=float))
    if xi.ndim > 1:
        xi = np.linalg.norm(xi, axis=-1)
    J = bessel_j_norm(lam, 2 * np.sqrt(np.outer(xi, r)))
    lhs = (J @ (wr * Mt)) / math.gamma(lam + 1)
    Ff = hankel_h1(ctx, profile, xi)
    rhs = bessel_j_norm(lam, 2 * np.sqrt(t * xi)) * Ff
    return float(np.max(np.abs(lhs - rhs)))


@dataclass
class PositivityReport:
    minimum: float
    passed: bool
    worst: list = field(default_factory=list)
    evaluations: int = 0


def positivity_scan(ctx: DunklContext, family: Sequence[Callable], grid, tol: float = 1e-9,
                    radial: Optional[bool] = None, n_worst: int = 5) -> PositivityReport:
    """Minimum of M_f(x, t) over nonnegative f in ``family`` and (x, t) in ``grid``.

    For N = 1 the explicit formula is used (any f on the line). For N >= 2
    the family must be radial profiles and the radial route is used.
    """
    records = []
    count = 0
    b2_cache = {}
    for x, t in grid:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        key = tuple(x.tolist())
        if ctx.N > 1 and key not in b2_cache:
            # the b^2 distribution depends on x only; share it across the family
            b2_cache[key] = _b2_distribution(ctx, x, 16, 24, compress=48)
        for fi, f in enumerate(family):
            if ctx.N == 1:
                val = translate_1d(ctx, f, float(x[0]), float(t))
            else:
                b2, wb = b2_cache[key]
                val = _mean_from_b2(ctx, f, float(np.linalg.norm(x)), float(t), b2, wb, 32)
            count += 1
            records.append((float(val), fi, key, float(t)))
    records.sort(key=lambda r: r[0])
    mn = records[0][0] if records else 0.0
    return PositivityReport(mn, mn >= -tol, records[:n_worst], count)


def heat_mean(ctx: DunklContext, z, s: float, x, t: float, n_vk: int = 32, n_u: int = 32,
              n_kingman: int = 32) -> float:
    """M_{h_k(., z; s)}(x, t) as a manifestly nonnegative integral.

    Radial translation (eta ~ mu_z, u Jacobi) produces a radius v; the
    Bessel-Kingman measure of (sqrt v, sqrt t) produces xi; the Laplace-Bessel
    identity leaves c_{k,1} s^-(lambda1+1) e^{-xi^2/s}.
    """
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    lam = ctx.lambda1
    rx, rz = np.linalg.norm(x), np.linalg.norm(z)
    T, W = vk_rule(ctx, n_vk)
    u, wu = _u_rule(ctx, n_u)
    inner = (T * z) @ x
    B = np.sqrt(np.clip(2 * (rx * rz + inner), 0, None))
    v = np.clip(rx + rz - B[:, None] * u[None, :], 0, None).ravel()
    wv = (W[:, None] * wu[None, :]).ravel()
    rule = gauss_jacobi(n_kingman, lam - 0.5, lam - 0.5)
    wk = rule.weights / rule.weights.sum()
    a = np.sqrt(v)[:, None]
    bt = math.sqrt(t)
    xi2 = np.clip(a * a + bt * bt - 2 * a * bt * rule.nodes[None, :], 0, None)
    vals = np.exp(-xi2 / s) @ wk
    return float(ctx.c_k1 * s ** (-(lam + 1)) * np.dot(wv, vals))


def product_formula_residual(ctx: DunklContext, x, t: float, z, measure: Optional[DiscreteMeasure] = None,
                             **kw) -> float:
    """|B(x, z) j(2 sqrt(t|z|)) - sum_j w_j B(xi_j, z)| over the sigma nodes."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    mu = measure if measure is not None else sigma_measure(ctx, x, t, **kw)
    if not np.any(z):
        return abs(1.0 - float(mu.weights.sum()))
    lhs = kernel_b1_batch(ctx, x, z)[0] * bessel_j_norm(ctx.lambda1, 2 * math.sqrt(t * np.linalg.norm(z)))
    rhs = float(np.dot(mu.weights, kernel_b1_batch(ctx, mu.nodes, z)))
    return abs(float(lhs) - rhs)


def equivariance_check(ctx: DunklContext, x, t: float, r: float, g, family: Sequence[Callable],
                       **kw):
    """(max |M_f(gx,t) - M_{f o g}(x,t)|, max |M_f(rx, rt) - M_{f(r .)}(x,t)|) over the family.

    ``g`` is a sign vector; functions act on point arrays (..., N).
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    mu_gx = sigma_measure(ctx, g * x, t, **kw)
    mu_x = sigma_measure(ctx, x, t, **kw)
    mu_r = sigma_measure(ctx, r * x, r * t, **kw)
    e1 = e2 = 0.0
    for f in family:
        a = np.dot(mu_gx.weights, f(mu_gx.nodes))
        b = np.dot(mu_x.weights, f(mu_x.nodes * g))
        e1 = max(e1, abs(a - b))
        c = np.dot(mu_r.weights, f(mu_r.nodes))
        d = np.dot(mu_x.weights, f(r * mu_x.nodes))
        e2 = max(e2, abs(c - d))
    return float(e1), float(e2)
