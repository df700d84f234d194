"""Desk-scale check suites run by ``khankel check``.

Each suite takes a context, a seeded generator and a tolerance table and
returns a list of Check records. Sizes are moderate so that a full run
finishes in a few minutes; the test suite runs the larger acceptance grids.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List

import numpy as np

from . import geometry, kernels, sphmean, specfun, transforms, translation, wave
from .dunkl import DunklContext, Poly, dunkl_laplacian, orbit, weight_k

__all__ = ["Check", "SUITES", "DEFAULT_TOLERANCES", "run_suite", "sigma_nodes_table"]


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d


DEFAULT_TOLERANCES: Dict[str, float] = {
    "jacobi_exactness": 1e-12,
    "bessel_ode": 1e-8,
    "gegenbauer_bound": 0.0,
    "laplace_bessel": 1e-10,
    "intertwining": 1e-8,
    "sphere_constant_mc": 1e-3,
    "kernel_bound": 1e-8,
    "kernel_symmetry": 1e-8,
    "eigen_residual_1d": 1e-4,
    "eigen_residual_nd": 1e-3,
    "spherical_average": 1e-7,
    "gram": 1e-8,
    "plancherel": 1e-6,
    "fourier_involution": 1e-5,
    "eigenvalues": 1e-6,
    "route_agreement": 1e-5,
    "translation_identity": 1e-14,
    "translation_symmetry": 1e-7,
    "translation_positivity": 1e-10,
    "kingman_identity": 1e-7,
    "rho_reproduces": 1e-7,
    "rho_support": 1e-12,
    "product_formula": 1e-5,
    "sigma_mass": 1e-8,
    "sigma_support": 1e-6,
    "positivity": 1e-9,
    "multiplier_identity": 1e-5,
    "closed_form": 1e-12,
    "grid_gap": 0.02,
    "eikonal": 1e-6,
    "triangle": 1e-12,
    "data_recovery": 1e-10,
    "two_route": 1e-4,
    "pde_residual": 1e-3,
    "huygens": 1e-6,
    "multiplier_energy": 1e-6,
    "rl_round_trip": 1e-8,
    "damped_oracle": 1e-9,
    "cone_energy_monotone": 1e-5,
}


def _packet(ctx):
    return transforms.laguerre_packet(ctx, [1.0, 0.5, -0.3])


def _point(rng, ctx, lo=-2.0, hi=2.0):
    return rng.uniform(lo, hi, ctx.N)


# ---------------------------------------------------------------------------


def suite_specfun(ctx: DunklContext, rng, tol) -> List[Check]:
    worst = 0.0
    for a, b in [(-0.5, 0.5), (0.3, 1.7), (ctx.lambda1, 0.0), (2.5, -0.25)]:
        rule = specfun.gauss_jacobi(12, a, b)
        for p in range(24):
            exact = specfun.beta_moment_jacobi(a, b, p)
            got = float(np.dot(rule.weights, rule.nodes ** p))
            # odd moments of symmetric weights vanish; measure those against m_0
            worst = max(worst, abs(got - exact) / (abs(exact) if exact != 0 else rule.total_weight()))
    out = [Check("jacobi_exactness", worst, tol["jacobi_exactness"])]
    xs = np.linspace(0.05, 40, 400)
    ode = max(float(specfun.bessel_ode_residual(l, xs).max()) for l in (-0.25, 0.5, ctx.lambda1, 3.7))
    out.append(Check("bessel_ode", ode, tol["bessel_ode"]))
    u = rng.uniform(-1, 1, 1000)
    viol = 0.0
    for n in (1, 2, 5, 9):
        for lam in (0.25, 1.0, 2.5):
            bound = specfun.gegenbauer_at_one(n, lam)
            viol = max(viol, float(np.max(np.abs(specfun.gegenbauer(n, lam, u)) - bound)) / bound)
    out.append(Check("gegenbauer_bound", max(viol, 0.0), tol["gegenbauer_bound"]))
    worst = 0.0
    for nu in (-0.5, 0.5, 2.0, 4.5, 7.0):
        for a in (0.5, 1.0, 2.0, 4.0, 8.0):
            for b in (0.0, 1.0, 3.0, 6.0, 10.0):
                closed = specfun.laplace_bessel_closed(nu, a, b)
                quad = specfun.halfline_integrate(lambda t: specfun.bessel_j_norm(nu, b * np.sqrt(t)),
                                                  nu, exp_rate=a, n=100)
                # relative to the integral of the envelope e^{-a t} t^nu
                worst = max(worst, abs(quad - closed) / specfun.laplace_bessel_closed(nu, a, 0.0))
    out.append(Check("laplace_bessel", worst, tol["laplace_bessel"]))
    return out


def suite_dunkl(ctx: DunklContext, rng, tol, mc_samples: int = 10_000_000) -> List[Check]:
    worst = 0.0
    for _ in range(5):
        p = Poly.random(ctx.N, 6, rng)
        lhs_f = p.vk(ctx).field()
        rhs = p.laplacian().vk(ctx)
        for _ in range(10):
            x = _point(rng, ctx)
            worst = max(worst, abs(dunkl_laplacian(ctx, lhs_f, x).value - float(rhs(x))))
    out = [Check("intertwining", worst, tol["intertwining"])]
    area = 2 * math.pi ** (ctx.N / 2) / math.gamma(ctx.N / 2)
    mc_rng = np.random.default_rng(rng.integers(2 ** 63))
    acc, done, chunk = 0.0, 0, 1_000_000
    while done < mc_samples:
        m = min(chunk, mc_samples - done)
        g = mc_rng.normal(size=(m, ctx.N))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        acc += float(weight_k(ctx, g).sum())
        done += m
    est = area * acc / mc_samples
    out.append(Check("sphere_constant_mc", abs(est - ctx.d_k1) / ctx.d_k1, tol["sphere_constant_mc"]))
    return out


def suite_kernels(ctx: DunklContext, rng, tol) -> List[Check]:
    X = rng.uniform(-3, 3, (1000, ctx.N))
    Xi = rng.uniform(-3, 3, (1000, ctx.N))
    B = kernels.kernel_b1_batch(ctx, X, Xi)
    Bt = kernels.kernel_b1_batch(ctx, Xi, X)
    out = [Check("kernel_bound", float(max(np.max(np.abs(B)) - 1.0, 0.0)), tol["kernel_bound"]),
           Check("kernel_symmetry", float(np.max(np.abs(B - Bt))), tol["kernel_symmetry"])]
    name = "eigen_residual_1d" if ctx.N == 1 else "eigen_residual_nd"
    res = 0.0
    for _ in range(5):
        x = _point(rng, ctx, 0.3, 2.0) * rng.choice([-1.0, 1.0], ctx.N)
        xi = _point(rng, ctx)
        res = max(res, kernels.eigen_residual(ctx, x, xi))
    out.append(Check(name, res, tol[name]))
    worst = 0.0
    for _ in range(5):
        x = _point(rng, ctx)
        v = float(rng.uniform(0, 3))
        ref = float(specfun.bessel_j_norm(ctx.lambda1, 2 * math.sqrt(np.linalg.norm(x) * v)))
        worst = max(worst, abs(kernels.kernel_spherical_avg(ctx, x, v) - ref))
    out.append(Check("spherical_average", worst, tol["spherical_average"]))
    return out


def suite_transforms(ctx: DunklContext, rng, tol) -> List[Check]:
    worst = 0.0
    for m in range(4):
        # psi_{l,m} carries r^m, so the weight is r^lambda1 e^{-2r}
        rule = specfun.gauss_laguerre(40, ctx.lambda1)
        s = rule.nodes / 2
        Psi = np.array([transforms.psi_scaled(ctx, l, m, s) for l in range(9)])
        G = (Psi * rule.weights * 2.0 ** (-(ctx.lambda1 + 1))) @ Psi.T
        worst = max(worst, float(np.max(np.abs(G - np.eye(9)))))
    out = [Check("gram", worst, tol["gram"])]
    P = _packet(ctx)
    hat = transforms.fourier_k1_radial(ctx, P)
    out.append(Check("plancherel", abs(transforms.weighted_norm(ctx, P) - transforms.weighted_norm(ctx, hat)),
                     tol["plancherel"]))
    r = np.linspace(0, 6, 13)
    quad_hat = transforms.RadialProfile(lambda s: transforms.hankel_h1(ctx, P, s), rate=1.0)
    back = transforms.hankel_h1(ctx, quad_hat, r)
    out.append(Check("fourier_involution", float(np.max(np.abs(back - P(r)))), tol["fourier_involution"]))
    worst = 0.0
    for l in range(6):
        prof = transforms.RadialProfile.exponential(lambda s, l=l: transforms.psi_scaled(ctx, l, 0, s), 1.0)
        worst = max(worst, float(np.max(np.abs(transforms.hankel_h1(ctx, prof, r)
                                               - (-1) ** l * transforms.psi(ctx, l, 0, r)))))
    out.append(Check("eigenvalues", worst, tol["eigenvalues"]))
    rho = np.linspace(0, 5, 11)
    agree = float(np.max(np.abs(transforms.hankel_h1(ctx, P, rho) - hat(rho))))
    if ctx.N == 1 and ctx.k[0] > 0:
        f1 = lambda y: P(np.abs(y))
        one_d = np.array([transforms.fourier_k1_1d(ctx, f1, xi, rate=1.0).real for xi in (-2.0, 0.5, 3.0)])
        agree = max(agree, float(np.max(np.abs(one_d - hat(np.array([2.0, 0.5, 3.0]))))))
    out.append(Check("route_agreement", agree, tol["route_agreement"]))
    return out


def suite_translation(ctx: DunklContext, rng, tol) -> List[Check]:
    f0 = lambda s: np.exp(-s) * (1 + s)
    ident = sym = 0.0
    for _ in range(5):
        x, y = _point(rng, ctx), _point(rng, ctx)
        ident = max(ident, abs(translation.translate_radial(ctx, f0, x, np.zeros(ctx.N))
                               - float(f0(np.linalg.norm(x)))))
        sym = max(sym, abs(translation.translate_radial(ctx, f0, x, y)
                           - translation.translate_radial(ctx, f0, y, x)))
    out = [Check("translation_identity", ident, tol["translation_identity"]),
           Check("translation_symmetry", sym, tol["translation_symmetry"])]
    mn = 0.0
    for c in np.linspace(0.2, 2.0, 5):
        bump = translation.radial_bump(5.0, center=c, width=0.15)
        for _ in range(10):
            mn = min(mn, translation.translate_radial(ctx, bump, _point(rng, ctx), _point(rng, ctx)))
    out.append(Check("translation_positivity", -mn, tol["translation_positivity"]))
    worst = 0.0
    for alpha in (0.0, 0.5, ctx.lambda1, 2.3):
        for u, v, w in [(0.5, 1.2, 1.0), (2.0, 0.3, 2.5), (1.0, 1.0, 3.0)]:
            mu = translation.bessel_product_measure(alpha, u, v)
            lhs = specfun.bessel_j_norm(alpha, u * w) * specfun.bessel_j_norm(alpha, v * w)
            worst = max(worst, abs(lhs - mu.integrate(lambda s: specfun.bessel_j_norm(alpha, s * w))))
    out.append(Check("kingman_identity", worst, tol["kingman_identity"]))
    rep = supp = 0.0
    for _ in range(3):
        x, y = _point(rng, ctx), _point(rng, ctx)
        mu = translation.rho_measure(ctx, x, y)
        rep = max(rep, abs(mu.integrate(f0) - translation.translate_radial(ctx, f0, x, y, 64, 64)))
        lo = mu.support_radius_bounds[0]
        supp = max(supp, float(max(lo * lo - mu.nodes.min(), 0.0)))
    out.append(Check("rho_reproduces", rep, tol["rho_reproduces"]))
    out.append(Check("rho_support", supp, tol["rho_support"]))
    return out


def _support_violation(ctx, x, t, mu):
    rt = np.sqrt(np.linalg.norm(mu.nodes, axis=1))
    low = abs(math.sqrt(np.linalg.norm(x)) - math.sqrt(t))
    v1 = float(max(low - rt.min(), 0.0))
    dist = np.min(np.stack([geometry.metric_d(mu.nodes, gx) for gx in orbit(ctx, x)]), axis=0)
    v2 = float(max(np.max(dist) - math.sqrt(t), 0.0))
    return max(v1, v2)


def suite_sphmean(ctx: DunklContext, rng, tol, n_points: int = 3) -> List[Check]:
    pf = mass = supp = 0.0
    for _ in range(n_points):
        x = _point(rng, ctx)
        t = float(rng.uniform(0.05, 2.5))
        mu = sphmean.sigma_measure(ctx, x, t)
        mass = max(mass, abs(mu.total_mass - 1))
        supp = max(supp, _support_violation(ctx, x, t, mu))
        for _ in range(3):
            pf = max(pf, sphmean.product_formula_residual(ctx, x, t, _point(rng, ctx), measure=mu))
    out = [Check("product_formula", pf, tol["product_formula"]),
           Check("sigma_mass", mass, tol["sigma_mass"]),
           Check("sigma_support", supp, tol["sigma_support"])]
    fam = [translation.radial_bump(5.0, center=c, width=0.2) for c in np.linspace(0.25, 2.0, 6)]
    grid = [(_point(rng, ctx), float(rng.uniform(0, 3))) for _ in range(20)]
    rep = sphmean.positivity_scan(ctx, fam, grid, tol=tol["positivity"])
    out.append(Check("positivity", max(-rep.minimum, 0.0), tol["positivity"]))
    res = sphmean.multiplier_residual(ctx, _packet(ctx), 0.7, np.linspace(0, 4, 9))
    out.append(Check("multiplier_identity", res, tol["multiplier_identity"]))
    return out


def suite_geometry(ctx: DunklContext, rng, tol) -> List[Check]:
    A = rng.normal(size=(1000, 2))
    B = rng.normal(size=(1000, 2))
    closed = max(abs(geometry.riemannian_2d_closed(a, b) - math.sqrt(2) * geometry.metric_d(a, b))
                 for a, b in zip(A, B))
    out = [Check("closed_form", closed, tol["closed_form"])]
    x, x0 = rng.uniform(0.5, 2, 2), -rng.uniform(0.5, 2, 2) * np.array([1.0, -1.0])
    g = geometry.graph_geodesic(x, x0, n=200)
    exact = math.sqrt(2) * geometry.metric_d(x, x0)
    out.append(Check("grid_gap", (g - exact) / exact, tol["grid_gap"]))
    eik = 0.0
    for _ in range(20):
        p, q = rng.normal(size=2), rng.normal(size=2)
        eik = max(eik, geometry.eikonal_residual(q, p))
    out.append(Check("eikonal", eik, tol["eikonal"]))
    T = rng.normal(size=(1000, 3, 2))
    tri = max(0.0, max(geometry.triangle_defect(*row) for row in T))
    out.append(Check("triangle", tri, tol["triangle"]))
    return out


def suite_wave(ctx: DunklContext, rng, tol) -> List[Check]:
    P = _packet(ctx)
    G = transforms.laguerre_packet(ctx, [0.2, -0.4])
    xs = [np.eye(ctx.N)[0] * r for r in (0.3, 1.1, 2.4)]
    rec = max(abs(wave.wave_spectral(ctx, P, G, x, 0.0) - float(P(np.array([np.linalg.norm(x)]))[0]))
              for x in xs)
    out = [Check("data_recovery", rec, tol["data_recovery"])]
    two = 0.0
    for x in xs:
        fit = wave.mean_route_fit(ctx, P, x, 2.0)
        for t in np.linspace(0, 2, 5):
            two = max(two, abs(fit(t) - wave.wave_spectral(ctx, P, None, x, t)))
    out.append(Check("two_route", two, tol["two_route"]))
    pde = max(wave.wave_pde_residual(ctx, P, G, x, 0.9) for x in xs)
    out.append(Check("pde_residual", pde, tol["pde_residual"]))
    x = np.eye(ctx.N)[0] * 2.25
    huy = 0.0
    for c in (0.35, 2.5):
        ok = wave.shell_outside_domain(x, 0.8, c, 0.15)
        val = wave.huygens_check(ctx, translation.radial_bump(10.0, center=c, width=0.15), x, 0.8)[1]
        huy = max(huy, val if ok else math.inf)
    out.append(Check("huygens", huy, tol["huygens"]))
    e = [wave.multiplier_energy(ctx, P, t) for t in (0.0, 1.0, 2.5)]
    out.append(Check("multiplier_energy", max(abs(v - e[0]) for v in e) / e[0], tol["multiplier_energy"]))
    a = ctx.lambda1
    poly = lambda t: 1 + t ** 2 - 0.3 * t ** 4 + 0.1 * t ** 8
    fit = wave.rl_inverse_fit(lambda t: wave.riemann_liouville(poly, a, t), a, 2.0, degree=8)
    tt = np.linspace(0, 2, 41)
    out.append(Check("rl_round_trip", float(np.max(np.abs(fit(tt) - poly(tt)))), tol["rl_round_trip"]))
    damp = max(abs(wave.hankel_damped_oracle(ctx, eps, r) - wave.hankel_damped_quadrature(ctx, eps, r))
               for eps in (0.5, 1.0, 2.0) for r in (0.0, 1.0, 4.0))
    out.append(Check("damped_oracle", damp, tol["damped_oracle"]))
    if ctx.N == 2:
        x0, t0 = np.array([2.0, 1.0]), 1.5
        es = [wave.wave_energy(ctx, P, G, x0, t0, t) for t in np.linspace(0, 1.4, 10)]
        rise = max(0.0, float(np.max(np.diff(es))))
        out.append(Check("cone_energy_monotone", rise / es[0], tol["cone_energy_monotone"]))
    return out


SUITES: Dict[str, Callable] = {
    "specfun": suite_specfun,
    "dunkl": suite_dunkl,
    "kernels": suite_kernels,
    "transforms": suite_transforms,
    "translation": suite_translation,
    "sphmean": suite_sphmean,
    "geometry": suite_geometry,
    "wave": suite_wave,
}


def run_suite(name: str, ctx: DunklContext, seed: int, tolerances: Dict[str, float]) -> dict:
    """Run one suite with its own generator (seeded from ``seed`` and the suite name)."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    offset = sorted(SUITES).index(name)
    rng = np.random.default_rng([seed, offset])
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances)
    checks = SUITES[name](ctx, rng, tol)
    worst = max(checks, key=lambda c: c.residual / c.tolerance if c.tolerance > 0 else
                (math.inf if c.residual > 0 else 0.0))
    return {
        "suite": name,
        "checks": [c.as_dict() for c in checks],
        "worst_residual": worst.residual,
        "worst_check": worst.name,
        "pass": all(c.passed for c in checks),
    }


def sigma_nodes_table(ctx: DunklContext, x, t: float):
    """Rows (xi_1..xi_N, weight) of the discretized representing measure."""
    mu = sphmean.sigma_measure(ctx, np.asarray(x, dtype=float), t)
    return np.column_stack([mu.nodes, mu.weights])
