"""Reflection-group data, weights, the intertwiner V_k and the Dunkl Laplacian.

Only the trivial group and the sign-flip group Z_2^N are supported. For
sign flips the positive roots are sqrt(2) e_i, so <alpha, alpha> = 2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import special

from .specfun import gauss_jacobi

__all__ = [
    "AdmissibilityError",
    "DunklContext",
    "ScalarField",
    "Poly",
    "weight_k",
    "weight_ka",
    "sphere_constant",
    "vk_rule",
    "vk_apply",
    "vk_moment",
    "sphere_rule",
    "dunkl_laplacian",
    "orbit",
    "group_elements",
]

HYPERPLANE_GUARD = 1e-8


class AdmissibilityError(ValueError):
    """The context violates 2<k> + N - 2 > 0."""


@dataclass(frozen=True)
class DunklContext:
    group: str
    N: int
    k: tuple = ()

    def __post_init__(self):
        if self.group not in ("trivial", "sign_flips"):
            raise ValueError(f"unsupported group {self.group!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        k = tuple(float(v) for v in self.k)
        if self.group == "trivial":
            if any(k):
                raise ValueError("trivial group takes no multiplicities")
            k = (0.0,) * self.N
        else:
            if len(k) == 1 and self.N > 1:
                k = k * self.N
            if len(k) != self.N:
                raise ValueError(f"need {self.N} multiplicities, got {len(k)}")
            if any(v < 0 for v in k):
                raise ValueError("multiplicities must be nonnegative")
        object.__setattr__(self, "k", k)
        if not self.lambda1 > 0:
            raise AdmissibilityError(
                f"inadmissible context: 2<k>+N-2 = {self.lambda1:g} must be > 0")

    @classmethod
    def from_config(cls, cfg: dict) -> "DunklContext":
        return cls(cfg.get("group", "sign_flips"), int(cfg["N"]), tuple(cfg.get("k", ())))

    def to_config(self) -> dict:
        return {"group": self.group, "N": self.N,
                "k": list(self.k) if self.group == "sign_flips" else []}

    @property
    def k_total(self) -> float:
        return float(sum(self.k))

    @property
    def lambda1(self) -> float:
        return 2 * self.k_total + self.N - 2

    def lambda_a(self, a: float) -> float:
        return self.lambda1 / a

    def lambda_kam(self, a: float, m: int) -> float:
        return (2 * m + self.lambda1) / a

    @property
    def d_k1(self) -> float:
        return sphere_constant(self)

    @property
    def c_k1(self) -> float:
        return 1.0 / (self.d_k1 * math.gamma(2 * self.k_total + self.N - 1))

    @property
    def translation_exponent(self) -> float:
        """Exponent N/2 + <k> - 2 of the (1-u^2) weight in the radial translation."""
        return self.N / 2 + self.k_total - 2


@dataclass
class ScalarField:
    """A function on R^N evaluated on arrays of points of shape (..., N).

    ``grad`` and ``lap`` are optional analytic oracles for the gradient and
    the Hessian trace.
    """
    func: Callable
    grad: Optional[Callable] = None
    lap: Optional[Callable] = None
    decay: str = "schwartz"

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# weights and constants


def weight_k(ctx: DunklContext, x):
    x = np.asarray(x, dtype=float)
    if ctx.group == "trivial":
        return np.ones(x.shape[:-1])
    return np.prod(np.abs(math.sqrt(2) * x) ** (2 * np.asarray(ctx.k)), axis=-1)


def weight_ka(ctx: DunklContext, x, a: float):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if a < 2 and np.any(r == 0):
        raise ZeroDivisionError("weight_ka is singular at the origin for a < 2")
    return r ** (a - 2) * weight_k(ctx, x)


@lru_cache(maxsize=128)
def sphere_constant(ctx: DunklContext) -> float:
    """d_{k,1}: integral of the weight over the unit sphere (closed Dirichlet form)."""
    k = np.asarray(ctx.k)
    log_int = math.log(2.0) + float(np.sum(special.gammaln(k + 0.5))) - special.gammaln(
        ctx.k_total + ctx.N / 2)
    return float(2.0 ** ctx.k_total * math.exp(log_int))


# ---------------------------------------------------------------------------
# group


def group_elements(ctx: DunklContext) -> np.ndarray:
    """Sign vectors (|G|, N); the trivial group is the all-ones vector."""
    if ctx.group == "trivial":
        return np.ones((1, ctx.N))
    return np.array(list(itertools.product((1.0, -1.0), repeat=ctx.N)))


def orbit(ctx: DunklContext, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    pts = group_elements(ctx) * x
    return np.unique(pts + 0.0, axis=0)  # +0.0 folds -0.0 into 0.0


# ---------------------------------------------------------------------------
# intertwining operator


def _rank_one_rule(kv: float, n: int):
    if kv == 0:
        return np.ones(1), np.ones(1)
    rule = gauss_jacobi(n, kv - 1.0, kv)
    return rule.nodes, rule.weights / rule.weights.sum()


@lru_cache(maxsize=256)
def vk_rule(ctx: DunklContext, n: int = 64):
    """Tensor rule (T, W) with V_k f(x) = sum_j W_j f(T_j * x).

    Each coordinate carries the probability density proportional to
    (1+t)(1-t^2)^(k_i-1) on [-1, 1]; coordinates with k_i = 0 are frozen at t=1.
    """
    if ctx.group == "trivial":
        T, W = np.ones((1, ctx.N)), np.ones(1)
    else:
        per = [_rank_one_rule(kv, n) for kv in ctx.k]
        T = np.array(list(itertools.product(*[p[0] for p in per])))
        W = np.prod(np.array(list(itertools.product(*[p[1] for p in per]))), axis=1)
    T.setflags(write=False)
    W.setflags(write=False)
    return T, W


def vk_apply(ctx: DunklContext, f: Callable, x, n: int = 64) -> float:
    x = np.asarray(x, dtype=float)
    T, W = vk_rule(ctx, n)
    return float(np.dot(W, f(T * x)))


def vk_moment(kv: float, p: int) -> float:
    """int t^p dmu_k(t) for the rank-one intertwiner measure."""
    if kv == 0:
        return 1.0
    j = p // 2
    if p % 2 == 0:
        return float(special.poch(0.5, j) / special.poch(kv + 0.5, j))
    return float(special.poch(0.5, j + 1) / special.poch(kv + 0.5, j + 1))


# ---------------------------------------------------------------------------
# sphere quadrature


def _beta_rule(p: float, q: float, n: int):
    # probability rule for Beta(p, q) on [0, 1]
    rule = gauss_jacobi(n, q - 1.0, p - 1.0)
    return (1.0 + rule.nodes) / 2.0, rule.weights / rule.weights.sum()


@lru_cache(maxsize=128)
def sphere_rule(ctx: DunklContext, n: int = 24):
    """Probability rule (nodes (q, N), weights (q,)) for weight_k dsigma / d_k1.

    Squared coordinates of the weighted sphere measure are Dirichlet with
    parameters k_i + 1/2; the simplex is covered by stick-breaking Beta rules
    and every node is replicated over all sign flips, which makes the rule
    Gaussian for sign-symmetrized smooth integrands.
    """
    a = np.asarray(ctx.k) + 0.5
    N = ctx.N
    if N == 1:
        Y, Wy = np.ones((1, 1)), np.ones(1)
    else:
        rules = [_beta_rule(a[i], a[i + 1:].sum(), n) for i in range(N - 1)]
        B = np.array(list(itertools.product(*[r[0] for r in rules])))
        Wy = np.prod(np.array(list(itertools.product(*[r[1] for r in rules]))), axis=1)
        Y = np.empty((len(B), N))
        rest = np.ones(len(B))
        for i in range(N - 1):
            Y[:, i] = rest * B[:, i]
            rest = rest * (1.0 - B[:, i])
        Y[:, N - 1] = rest
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=N)))
    nodes = (np.sqrt(np.clip(Y, 0, None))[:, None, :] * signs[None, :, :]).reshape(-1, N)
    weights = np.repeat(Wy / len(signs), len(signs))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


# ---------------------------------------------------------------------------
# Dunkl Laplacian


class LaplacianResult(NamedTuple):
    value: float
    finite_difference: bool


def _fd_grad(f, x, h):
    e = np.eye(len(x)) * h
    return np.array([(f(x + e[i]) - f(x - e[i])) / (2 * h) for i in range(len(x))])


def _fd_second(f, x, i, h):
    e = np.zeros(len(x))
    e[i] = h
    return (f(x + e) - 2 * f(x) + f(x - e)) / h ** 2


def dunkl_laplacian(ctx: DunklContext, f, x, h: Optional[float] = None) -> LaplacianResult:
    """Dunkl Laplacian of ``f`` at a single point ``x``.

    Uses the analytic oracles of a ScalarField when present and central
    differences (step ``h``) otherwise. Within the hyperplane guard band the
    reflection pair for that root is replaced by its limit 2 k_i d_i^2 f.
    """
    x = np.asarray(x, dtype=float)
    N = len(x)
    if N != ctx.N:
        raise ValueError("dimension mismatch")
    r = np.linalg.norm(x)
    if h is None:
        h = 1e-4 * max(1.0, r)
    fx = lambda p: float(f(p))
    grad_or = getattr(f, "grad", None)
    lap_or = getattr(f, "lap", None)
    fd = grad_or is None or lap_or is None
    grad = np.asarray(grad_or(x), dtype=float) if grad_or is not None else _fd_grad(fx, x, h)
    if lap_or is not None:
        lap = float(lap_or(x))
    else:
        lap = sum(_fd_second(fx, x, i, h) for i in range(N))
    f0 = fx(x)
    total = lap
    for i, kv in enumerate(ctx.k):
        if kv == 0:
            continue
        if abs(x[i]) <= HYPERPLANE_GUARD * max(r, 1e-300):
            total += 2 * kv * _fd_second(fx, x, i, h)
            fd = True
            continue
        xs = x.copy()
        xs[i] = -xs[i]
        total += 2 * kv * grad[i] / x[i] - kv * (f0 - fx(xs)) / x[i] ** 2
    return LaplacianResult(float(total), fd)


# ---------------------------------------------------------------------------
# polynomials (exact intertwining checks)


class Poly:
    """Sparse real polynomial in N variables: {exponent tuple: coefficient}."""

    def __init__(self, terms: dict, N: int):
        self.N = N
        self.terms = {tuple(e): float(c) for e, c in terms.items() if c != 0}

    @classmethod
    def random(cls, N: int, degree: int, rng) -> "Poly":
        terms = {}
        for e in itertools.product(range(degree + 1), repeat=N):
            if sum(e) <= degree:
                terms[e] = rng.normal()
        return cls(terms, N)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for e, c in self.terms.items():
            out = out + c * np.prod(x ** np.asarray(e), axis=-1)
        return out

    def deriv(self, i: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            if e[i] > 0:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = out.get(tuple(e2), 0.0) + c * e[i]
        return Poly(out, self.N)

    def laplacian(self) -> "Poly":
        out = {}
        for i in range(self.N):
            for e, c in self.deriv(i).deriv(i).terms.items():
                out[e] = out.get(e, 0.0) + c
        return Poly(out, self.N)

    def vk(self, ctx: DunklContext) -> "Poly":
        """Exact V_k image: x^e -> prod_i m_{e_i}(k_i) x^e."""
        out = {}
        for e, c in self.terms.items():
            out[e] = c * math.prod(vk_moment(ctx.k[i], e[i]) for i in range(self.N))
        return Poly(out, self.N)

    def field(self) -> ScalarField:
        grads = [self.deriv(i) for i in range(self.N)]
        lap = self.laplacian()
        return ScalarField(self, grad=lambda x: np.array([g(x) for g in grads]), lap=lap,
                           decay="polynomial")
