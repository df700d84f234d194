"""Special functions and quadrature rules shared by the rest of the package."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, linalg, special

__all__ = [
    "QuadratureRule",
    "QuadratureError",
    "log_gamma",
    "bessel_j_norm",
    "bessel_ode_residual",
    "bessel_i_norm",
    "log_bessel_i_norm",
    "gegenbauer",
    "laguerre",
    "laguerre_exact",
    "gauss_jacobi",
    "gauss_laguerre",
    "gauss_legendre",
    "halfline_integrate",
    "laplace_bessel_closed",
    "laplace_bessel_oracle",
    "discrete_gauss_rule",
    "discrete_gauss_rules",
    "DEFAULT_ABS_TOL",
]

DEFAULT_ABS_TOL = 1e-10

# below this |x| the power series is summed directly; above it scipy's
# Amos-based J_nu is used (see design notes in README)
_SERIES_CUTOFF = 2.0


class QuadratureError(RuntimeError):
    """Raised when a quadrature rule or adaptive integral fails to converge."""


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    weight_kind: str
    params: tuple
    exactness_degree: int

    def __post_init__(self):
        for arr in (self.nodes, self.weights):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f: Callable) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def total_weight(self) -> float:
        return float(np.sum(self.weights))


# ---------------------------------------------------------------------------
# Gamma / Bessel


def log_gamma(x: float) -> float:
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return float(special.gammaln(x))


def _j_series(lam, x, terms=40):
    # sum_j (-x^2/4)^j / (j! (lam+1)_j), valid for complex x
    z = -(np.asarray(x) ** 2) / 4.0
    term = np.ones_like(z)
    total = np.ones_like(z)
    for j in range(1, terms):
        term = term * z / (j * (lam + j))
        total = total + term
    return total


def bessel_j_norm(lam: float, x):
    """Normalized Bessel function j_lam(x) = 2^lam Gamma(lam+1) x^-lam J_lam(x).

    Even entire function of x with j_lam(0) = 1. Accepts scalars or arrays,
    real or complex.
    """
    if not lam > -1:
        raise ValueError(f"bessel_j_norm requires lam > -1, got {lam}")
    x = np.asarray(x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    cplx = np.iscomplexobj(x)
    out = np.empty(x.shape, dtype=complex if cplx else float)
    ax = np.abs(x)
    small = ax <= _SERIES_CUTOFF
    if np.any(small):
        out[small] = _j_series(lam, x[small])
    big = ~small
    if np.any(big):
        xb = x[big]
        if not cplx:
            xb = np.abs(xb)  # even function
        logpre = special.gammaln(lam + 1) + lam * np.log(2.0)
        out[big] = np.exp(logpre - lam * np.log(xb)) * special.jv(lam, xb)
    return out[0] if scalar else out


def bessel_j_norm_deriv(lam: float, x):
    """d/dx j_lam(x) = -x j_{lam+1}(x) / (2(lam+1))."""
    return -np.asarray(x) * bessel_j_norm(lam + 1, x) / (2.0 * (lam + 1))


def bessel_ode_residual(lam: float, x):
    """|j'' + (2 lam + 1)/x j' + j| for j = j_lam, from the analytic derivative chain."""
    x = np.asarray(x, dtype=float)
    d1 = -x * bessel_j_norm(lam + 1, x) / (2 * (lam + 1))
    d2 = -(bessel_j_norm(lam + 1, x) - x * x * bessel_j_norm(lam + 2, x) / (2 * (lam + 2))) / (2 * (lam + 1))
    return np.abs(d2 + (2 * lam + 1) / x * d1 + bessel_j_norm(lam, x))


def log_bessel_i_norm(lam: float, w):
    """log of Itilde_lam(w) = j_lam(i w) / Gamma(lam+1), w >= 0."""
    if not lam > -1:
        raise ValueError(f"lam must exceed -1, got {lam}")
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("bessel_i_norm requires w >= 0")
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    out = np.empty_like(w)
    small = w <= _SERIES_CUTOFF
    if np.any(small):
        out[small] = np.log(_j_series(lam, 1j * w[small]).real) - special.gammaln(lam + 1)
    big = ~small
    if np.any(big):
        wb = w[big]
        # I_lam(w) = ive(lam, w) e^w
        out[big] = lam * np.log(2.0) - lam * np.log(wb) + np.log(special.ive(lam, wb)) + wb
    return out[0] if scalar else out


def bessel_i_norm(lam: float, w):
    """Itilde_lam(w) = j_lam(i w)/Gamma(lam+1); positive, nondecreasing in w >= 0.

    Raises OverflowError when the value leaves the float range; use
    log_bessel_i_norm there.
    """
    logv = log_bessel_i_norm(lam, w)
    if np.any(np.asarray(logv) > 709.0):
        raise OverflowError("bessel_i_norm overflow; use log_bessel_i_norm")
    return np.exp(logv)


# ---------------------------------------------------------------------------
# Orthogonal polynomials


def gegenbauer(n: int, lam: float, u):
    """Gegenbauer polynomial C_n^lam(u) for |u| <= 1, lam > 0.

    Explicit finite sum for n <= 10, three-term recurrence above (the
    alternating sum loses about 1e-10 relative by n = 14).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if not lam > 0:
        raise ValueError(f"gegenbauer requires lam > 0, got {lam}")
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1 + 1e-14):
        raise ValueError("gegenbauer requires |u| <= 1")
    if n <= 10:
        total = np.zeros_like(u)
        lg = special.gammaln(lam)
        for k in range(n // 2 + 1):
            coef = math.exp(special.gammaln(n - k + lam) - lg
                            - special.gammaln(k + 1) - special.gammaln(n - 2 * k + 1))
            total = total + (-1) ** k * coef * (2 * u) ** (n - 2 * k)
        return total
    c_prev, c = np.ones_like(u), 2 * lam * u
    for m in range(1, n):
        c_prev, c = c, (2 * (m + lam) * u * c - (m + 2 * lam - 1) * c_prev) / (m + 1)
    return c


def gegenbauer_at_one(n: int, lam: float) -> float:
    return float(special.poch(2 * lam, n) / math.factorial(n))


def laguerre(l: int, mu: float, t):
    """Generalized Laguerre polynomial L_l^mu(t).

    Explicit sum for l <= 6, three-term recurrence otherwise (the sum
    cancels badly for larger l and t).
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    if not mu > -1:
        raise ValueError(f"laguerre requires mu > -1, got {mu}")
    t = np.asarray(t, dtype=float)
    if l <= 6:
        return _laguerre_sum(l, mu, t)
    return _laguerre_rec(l, mu, t)


def _laguerre_sum(l, mu, t):
    total = np.zeros_like(t, dtype=float)
    for j in range(l + 1):
        coef = math.exp(special.gammaln(mu + l + 1) - special.gammaln(l - j + 1)
                        - special.gammaln(mu + j + 1) - special.gammaln(j + 1))
        total = total + (-1) ** j * coef * t ** j
    return total


def _laguerre_rec(l, mu, t):
    p_prev, p = np.ones_like(t, dtype=float), 1.0 + mu - t
    if l == 0:
        return p_prev
    for m in range(1, l):
        p_prev, p = p, ((2 * m + 1 + mu - t) * p - (m + mu) * p_prev) / (m + 1)
    return p


def laguerre_exact(l: int, mu: Fraction, t: Fraction) -> Fraction:
    """Exact rational L_l^mu(t); used as a test oracle."""
    mu, t = Fraction(mu), Fraction(t)
    total = Fraction(0)
    for j in range(l + 1):
        # Gamma(mu+l+1)/Gamma(mu+j+1) = (mu+j+1)(mu+j+2)...(mu+l)
        ratio = Fraction(1)
        for i in range(j + 1, l + 1):
            ratio *= mu + i
        total += (-1) ** j * ratio / (math.factorial(l - j) * math.factorial(j)) * t ** j
    return total


# ---------------------------------------------------------------------------
# Quadrature rules


@lru_cache(maxsize=512)
def gauss_jacobi(n: int, alpha: float, beta: float) -> QuadratureRule:
    """Gauss-Jacobi rule for weight (1-u)^alpha (1+u)^beta on [-1, 1]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (alpha > -1 and beta > -1):
        raise ValueError(f"Jacobi parameters must exceed -1, got ({alpha}, {beta})")
    if alpha == 0 and beta == 0:
        x, w = special.roots_legendre(n)
    else:
        x, w = special.roots_jacobi(n, alpha, beta)
    x, w = np.asarray(x, float), np.asarray(w, float)
    if not (np.all(np.isfinite(x)) and np.all(w > 0) and np.all(np.abs(x) < 1)):
        raise QuadratureError(f"Gauss-Jacobi node finding failed for n={n}, alpha={alpha}, beta={beta}")
    return QuadratureRule(x, w, "jacobi", (float(alpha), float(beta)), 2 * n - 1)


def gauss_legendre(n: int) -> QuadratureRule:
    r = gauss_jacobi(n, 0.0, 0.0)
    return QuadratureRule(r.nodes.copy(), r.weights.copy(), "legendre", (), r.exactness_degree)


_MAX_LAGUERRE = 200


@lru_cache(maxsize=256)
def gauss_laguerre(n: int, alpha: float) -> QuadratureRule:
    """Generalized Gauss-Laguerre rule for weight s^alpha e^-s on [0, inf).

    Nodes whose weights underflow are dropped.
    """
    if not alpha > -1:
        raise ValueError(f"alpha must exceed -1, got {alpha}")
    if n > _MAX_LAGUERRE:
        raise ValueError(f"Gauss-Laguerre order capped at {_MAX_LAGUERRE}")
    x, w = special.roots_genlaguerre(n, alpha)
    x, w = np.asarray(x, float), np.asarray(w, float)
    keep = w > 0
    x, w = x[keep], w[keep]
    if not np.all(np.isfinite(x)):
        raise QuadratureError(f"Gauss-Laguerre node finding failed for n={n}, alpha={alpha}")
    return QuadratureRule(x, w, "generalized-laguerre", (float(alpha),), 2 * n - 1)


def beta_moment_jacobi(alpha: float, beta: float, p: int) -> float:
    """Exact int_{-1}^1 u^p (1-u)^alpha (1+u)^beta du.

    m_0 is a Beta function; integrating d/du[u^p (1-u)^(alpha+1) (1+u)^(beta+1)]
    gives (p + alpha + beta + 2) m_{p+1} = p m_{p-1} + (beta - alpha) m_p,
    which avoids the cancellation of a binomial expansion.
    """
    m0 = 2 ** (alpha + beta + 1) * math.exp(special.betaln(alpha + 1, beta + 1))
    prev, cur = 0.0, m0
    for q in range(p):
        prev, cur = cur, (q * prev + (beta - alpha) * cur) / (q + alpha + beta + 2)
    return cur


# ---------------------------------------------------------------------------
# Half-line integration


def halfline_integrate(f, lam: float, *, exp_rate: Optional[float] = None,
                       support: Optional[float] = None, tol: float = DEFAULT_ABS_TOL,
                       n: int = 120, return_error: bool = False):
    """Compute int_0^inf f(s) s^lam ds.

    If ``exp_rate`` c is given, ``f`` is taken to be the *smooth* factor g with
    the integrand g(s) e^{-c s} s^lam, and generalized Gauss-Laguerre is used
    with order doubling until two successive values agree to ``tol``.
    Otherwise ``support`` R must bound the support of f and an adaptive
    algebraic-endpoint rule on [0, R] is used.
    """
    if not lam > -1:
        raise ValueError("lam must exceed -1")
    if exp_rate is not None:
        c = float(exp_rate)
        if not c > 0:
            raise ValueError("exp_rate must be positive")
        scale = c ** -(lam + 1)
        prev = None
        for m in (n, 2 * n):
            rule = gauss_laguerre(min(m, _MAX_LAGUERRE), lam)
            terms = rule.weights * f(rule.nodes / c)
            val = scale * np.sum(terms)
            # roundoff floor from cancellation among the terms
            floor = 64 * np.finfo(float).eps * scale * np.sum(np.abs(terms))
            if prev is not None:
                change = abs(val - prev)
                if change <= max(tol, floor, 1e-11 * abs(val)):
                    return (val, change) if return_error else val
                raise QuadratureError(
                    f"Gauss-Laguerre did not converge: change {change:.3e} at order {m}")
            prev = val
    if support is None:
        raise ValueError("either exp_rate or support must be declared")
    val, err = integrate.quad(lambda s: float(f(s)), 0.0, float(support), weight="alg",
                              wvar=(lam, 0.0), epsabs=tol, epsrel=1e-12, limit=400)
    if err > 10 * tol:
        raise QuadratureError(f"adaptive quadrature error estimate {err:.3e} above tolerance")
    return (val, err) if return_error else val


def laplace_bessel_closed(nu: float, a: float, b: float) -> float:
    """Closed form of int_0^inf e^{-a t} t^nu j_nu(b sqrt t) dt = Gamma(nu+1) a^-(nu+1) e^{-b^2/(4a)}."""
    return math.exp(special.gammaln(nu + 1) - (nu + 1) * math.log(a) - b * b / (4 * a))


def laplace_bessel_oracle(nu: float, a: float, b: float, rtol: float = 1e-10) -> float:
    """Closed form checked against Gauss-Laguerre quadrature; raises on disagreement."""
    if not nu > -1:
        raise ValueError("nu must exceed -1")
    if not a > 0:
        raise ValueError("a must be positive")
    closed = laplace_bessel_closed(nu, a, b)
    quad = halfline_integrate(lambda t: bessel_j_norm(nu, b * np.sqrt(t)), nu, exp_rate=a,
                              tol=1e-3 * rtol * closed, n=100)
    if abs(quad - closed) > rtol * abs(closed):
        raise AssertionError(f"Laplace-Bessel mismatch: closed={closed!r} quadrature={quad!r}")
    return closed


_RULE_CHUNK = 32


def discrete_gauss_rules(nodes, weights, n: int):
    """Row-wise n-point Gauss rules of positive discrete measures (rows of
    ``nodes``, ``weights``), by the batched Stieltjes recurrence.

    Zero-weight atoms are ignored. Returns arrays (P, n); rows with fewer
    than n distinct atoms are padded with zero-weight nodes.
    """
    x = np.asarray(nodes, dtype=float)
    w = np.clip(np.asarray(weights, dtype=float), 0, None)
    P = x.shape[0]
    if P > _RULE_CHUNK:
        parts = [discrete_gauss_rules(x[i:i + _RULE_CHUNK], w[i:i + _RULE_CHUNK], n)
                 for i in range(0, P, _RULE_CHUNK)]
        return np.concatenate([a for a, _ in parts]), np.concatenate([b for _, b in parts])
    # move live atoms to the front of each row and drop the all-dead tail
    order = np.argsort(w <= 0, axis=1, kind="stable")
    width = max(int((w > 0).sum(axis=1).max(initial=0)), 1)
    x = np.take_along_axis(x, order[:, :width], axis=1)
    w = np.take_along_axis(w, order[:, :width], axis=1)
    mass = w.sum(axis=1)
    live = w > 0
    big = np.where(live, x, np.nan)
    lo, hi = np.nanmin(np.where(live.any(1)[:, None], big, 0.0), axis=1), \
        np.nanmax(np.where(live.any(1)[:, None], big, 0.0), axis=1)
    shift = (lo + hi) / 2
    scale = np.maximum((hi - lo) / 2, 1e-300)
    y = (x - shift[:, None]) / scale[:, None]
    q = np.sqrt(w / np.where(mass > 0, mass, 1.0)[:, None])
    q_prev = np.zeros_like(q)
    alpha = np.zeros((P, n))
    beta = np.zeros((P, n))
    m = np.full(P, n)
    done = mass <= 0
    m[done] = 0
    for j in range(n):
        v = y * q
        alpha[:, j] = np.einsum("pm,pm->p", q, v)
        v -= alpha[:, j, None] * q
        if j:
            v -= beta[:, j - 1, None] * q_prev
        bj = np.linalg.norm(v, axis=1)
        stop = ~done & (bj <= 1e-13 * np.maximum(1.0, np.abs(alpha[:, j])))
        m[stop] = j + 1
        done |= stop
        beta[:, j] = np.where(done, 0.0, bj)
        q_prev, q = q, np.where(done[:, None], 0.0, v / np.where(bj > 0, bj, 1.0)[:, None])
        if done.all():
            break
    out_x = np.zeros((P, n))
    out_w = np.zeros((P, n))
    for p in range(P):
        if m[p] == 0:
            continue
        theta, vec = linalg.eigh_tridiagonal(alpha[p, :m[p]], beta[p, :m[p] - 1])
        out_x[p, :m[p]] = shift[p] + scale[p] * theta
        out_w[p, :m[p]] = mass[p] * vec[0] ** 2
    return out_x, out_w


def discrete_gauss_rule(nodes, weights, n: int):
    """n-point Gauss rule of a positive discrete measure on the line.

    Lanczos (discretized Stieltjes) with full reorthogonalization; the result
    has positive weights, nodes inside the hull of the atoms, and matches the
    first 2n-1 moments. Fewer nodes are returned if the measure has fewer
    distinct atoms.
    """
    x = np.asarray(nodes, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    keep = w > 0
    x, w = x[keep], w[keep]
    mass = w.sum()
    if len(x) == 0:
        return np.zeros(0), np.zeros(0)
    if len(x) <= n:
        return x.copy(), w.copy()
    shift = x.mean()
    scale = max(np.ptp(x) / 2, 1e-300)
    y = (x - shift) / scale
    q = np.sqrt(w / mass)
    Q = np.empty((n, len(x)))
    alpha = np.empty(n)
    beta = np.empty(n)
    m = n
    for j in range(n):
        Q[j] = q
        v = y * q
        alpha[j] = q @ v
        v -= Q[:j + 1].T @ (Q[:j + 1] @ v)
        v -= Q[:j + 1].T @ (Q[:j + 1] @ v)
        beta[j] = np.linalg.norm(v)
        if beta[j] <= 1e-13 * max(1.0, abs(alpha[j])):
            m = j + 1
            break
        q = v / beta[j]
    theta, vec = linalg.eigh_tridiagonal(alpha[:m], beta[:m - 1])
    return shift + scale * theta, mass * vec[0] ** 2
