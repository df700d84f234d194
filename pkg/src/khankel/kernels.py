"""The k-Hankel kernel B_{k,1}, its spherical averages and the deformed heat kernel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .dunkl import DunklContext, ScalarField, dunkl_laplacian, sphere_rule, vk_rule
from .specfun import QuadratureError, bessel_j_norm, log_bessel_i_norm

__all__ = [
    "KernelEval",
    "kernel_index",
    "kernel_b1",
    "kernel_b1_batch",
    "kernel_spherical_avg",
    "heat_kernel",
    "eigen_residual",
]

_CHUNK = 2_000_000


@dataclass(frozen=True)
class KernelEval:
    value: float
    error_estimate: float
    method: str


def kernel_index(ctx: DunklContext) -> float:
    """Bessel index (N-3)/2 + <k> of the radial profile inside V_k."""
    return (ctx.N - 3) / 2 + ctx.k_total


def _auto_order(ctx: DunklContext, prod_max: float) -> int:
    # j_lam(sqrt(z)) is entire in z; node count grows with the oscillation count
    return int(min(160, 12 + 2.5 * math.sqrt(max(prod_max, 0.0))))


def _unit(X):
    r = np.linalg.norm(X, axis=-1)
    safe = np.where(r > 0, r, 1.0)
    return X / safe[:, None], r


def kernel_b1_batch(ctx: DunklContext, X, Xi, n: int | None = None) -> np.ndarray:
    """B_{k,1}(x_m, xi_m) for row-aligned point arrays X, Xi of shape (M, N).

    Either argument may be a single point, which is broadcast.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Xi = np.atleast_2d(np.asarray(Xi, dtype=float))
    X, Xi = np.broadcast_arrays(X, Xi)
    Xu, rx = _unit(X)
    Xiu, rxi = _unit(Xi)
    prod = rx * rxi
    if n is None:
        n = _auto_order(ctx, float(prod.max(initial=0.0)))
    lam = kernel_index(ctx)
    T, W = vk_rule(ctx, n)
    out = np.ones(len(X))
    live = np.flatnonzero(prod > 0)
    step = max(1, _CHUNK // len(W))
    for s in range(0, len(live), step):
        idx = live[s:s + step]
        # <x', t * xi'> for every node t
        inner = (Xu[idx] * Xiu[idx]) @ T.T
        arg = np.sqrt(np.clip(2 * prod[idx, None] * (1 + inner), 0, None))
        out[idx] = bessel_j_norm(lam, arg) @ W
    return out


def kernel_b1(ctx: DunklContext, x, xi, n: int | None = None, tol: float = 1e-12) -> KernelEval:
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if not np.any(x) or not np.any(xi):
        return KernelEval(1.0, 0.0, "origin_shortcut")
    if n is None:
        n = _auto_order(ctx, float(np.linalg.norm(x) * np.linalg.norm(xi)))
    v1 = kernel_b1_batch(ctx, x, xi, n)[0]
    v2 = kernel_b1_batch(ctx, x, xi, min(2 * n, 320))[0]
    err = abs(v2 - v1)
    if err > max(tol, 1e-8):
        raise QuadratureError(f"kernel quadrature unconverged, estimate {err:.3e}")
    return KernelEval(float(v2), float(err), "vk_quadrature")


def kernel_spherical_avg(ctx: DunklContext, x, v: float, p=None, m: int = 0,
                         n_sphere: int = 24) -> float:
    """Weighted sphere average of y' -> B_{k,1}(x, v y') p(y')."""
    x = np.asarray(x, dtype=float)
    nodes, w = sphere_rule(ctx, n_sphere)
    pv = np.ones(len(w)) if p is None else np.asarray(p(nodes), dtype=float)
    if v == 0:
        return float(np.dot(w, pv))
    vals = kernel_b1_batch(ctx, x[None, :], v * nodes)
    return float(np.dot(w, vals * pv))


def heat_kernel(ctx: DunklContext, x, y, t: float, n: int | None = None) -> float:
    """Deformed heat kernel h_k(x, y; t), evaluated in the log domain."""
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rx, ry = np.linalg.norm(x), np.linalg.norm(y)
    lam = kernel_index(ctx)
    log_pref = math.log(ctx.c_k1) - (ctx.lambda1 + 1) * math.log(t) - (rx + ry) / t
    if rx == 0 or ry == 0:
        return math.exp(log_pref)
    if n is None:
        n = _auto_order(ctx, rx * ry / t ** 2)
    T, W = vk_rule(ctx, n)
    inner = (T * (y / ry)) @ (x / rx)
    w = np.sqrt(np.clip(2 * rx * ry * (1 + inner), 0, None)) / t
    logs = log_bessel_i_norm(lam, w) + special.gammaln(lam + 1)
    return float(math.exp(log_pref + special.logsumexp(logs, b=W)))


def eigen_residual(ctx: DunklContext, x, xi, n: int | None = None) -> float:
    """| |x| Delta_k^x B(x, xi) + |xi| B(x, xi) | by central differences in x."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        return 0.0
    rx = float(np.linalg.norm(x))
    if rx == 0:
        raise ValueError("eigen_residual requires x != 0")
    if n is None:
        n = _auto_order(ctx, 1.5 * rx * float(np.linalg.norm(xi))) + 8
    f = ScalarField(lambda p: kernel_b1_batch(ctx, np.atleast_2d(p), xi, n)[0])
    h = 1e-4 * max(1.0, rx)
    lap = dunkl_laplacian(ctx, f, x, h=h).value
    b = kernel_b1_batch(ctx, x, xi, n)[0]
    return abs(rx * lap + float(np.linalg.norm(xi)) * b)
