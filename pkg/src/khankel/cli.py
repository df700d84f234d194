"""Command line entry point: ``khankel <subcommand> [--config PATH] [--seed N] [--out DIR]``.

Every subcommand reads the same JSON config (all fields optional)::

    {
      "context": {"group": "sign_flips", "N": 1, "k": [1.0]},
      "suites": ["specfun", "wave"],
      "seed": 0,
      "out": "khankel-out",
      "tolerances": {"sigma_mass": 1e-8},
      "sigma_point": {"x": [1.3], "t": 0.6}
    }

Reports are JSON (sorted keys, no timestamps) and CSV (17 significant
digits). ``check`` exits 0 iff every check passes; configuration and
admissibility errors exit 2.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import geometry, kernels, sphmean, suites, transforms, translation, wave
from .dunkl import AdmissibilityError, DunklContext

__all__ = ["ConfigError", "RunConfig", "load_config", "main"]

DEFAULT_CONTEXT = {"group": "sign_flips", "N": 1, "k": [1.0]}
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    """Malformed config: JSON syntax (with line and column) or a bad field."""


@dataclasses.dataclass(frozen=True)
class RunConfig:
    context: DunklContext
    suites: tuple
    seed: int
    out: Path
    tolerances: dict
    sigma_point: tuple  # (x, t)

    def to_json(self) -> dict:
        return {
            "context": self.context.to_config(),
            "seed": self.seed,
            "suites": list(self.suites),
            "tolerances": dict(sorted(self.tolerances.items())),
        }


# ---------------------------------------------------------------------------
# config


_FIELDS = {"context", "suites", "seed", "out", "tolerances", "sigma_point"}


def _field(cond: bool, name: str, msg: str):
    if not cond:
        raise ConfigError(f"config field {name!r}: {msg}")


def _number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_config(doc: dict) -> RunConfig:
    """Validate a decoded config document; admissibility is checked here."""
    _field(isinstance(doc, dict), "<root>", "must be a JSON object")
    unknown = sorted(set(doc) - _FIELDS)
    _field(not unknown, unknown[0] if unknown else "", "unknown field")
    cdoc = doc.get("context", DEFAULT_CONTEXT)
    _field(isinstance(cdoc, dict), "context", "must be an object")
    for key in cdoc:
        _field(key in ("group", "N", "k"), f"context.{key}", "unknown field")
    N = cdoc.get("N", 1)
    _field(isinstance(N, int) and not isinstance(N, bool) and N >= 1, "context.N",
           "must be a positive integer")
    k = cdoc.get("k", [1.0])
    if _number(k):
        k = [k]
    _field(isinstance(k, list) and all(_number(v) for v in k), "context.k",
           "must be a number or a list of numbers")
    group = cdoc.get("group", "sign_flips")
    _field(group in ("sign_flips", "trivial"), "context.group", "must be 'sign_flips' or 'trivial'")
    try:
        ctx = DunklContext(group, N, tuple(k))
    except AdmissibilityError:
        raise
    except ValueError as exc:
        raise ConfigError(f"config field 'context': {exc}") from None

    names = doc.get("suites", list(suites.SUITES))
    _field(isinstance(names, list) and all(isinstance(s, str) for s in names), "suites",
           "must be a list of suite names")
    for s in names:
        _field(s in suites.SUITES, "suites", f"unknown suite {s!r}; known: {', '.join(suites.SUITES)}")
    seed = doc.get("seed", 0)
    _field(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0, "seed",
           "must be a nonnegative integer")
    out = doc.get("out", "khankel-out")
    _field(isinstance(out, str) and out != "", "out", "must be a nonempty path string")
    tols = doc.get("tolerances", {})
    _field(isinstance(tols, dict), "tolerances", "must be an object")
    for key, val in tols.items():
        _field(key in suites.DEFAULT_TOLERANCES, f"tolerances.{key}", "unknown check name")
        _field(_number(val) and val >= 0, f"tolerances.{key}", "must be a nonnegative number")
    sp = doc.get("sigma_point", {})
    _field(isinstance(sp, dict), "sigma_point", "must be an object")
    x = sp.get("x", [1.3] + [0.4] * (N - 1))
    _field(isinstance(x, list) and len(x) == N and all(_number(v) for v in x), "sigma_point.x",
           f"must be a list of {N} numbers")
    t = sp.get("t", 0.6)
    _field(_number(t) and t >= 0, "sigma_point.t", "must be a nonnegative number")
    return RunConfig(ctx, tuple(names), seed, Path(out), {k_: float(v) for k_, v in tols.items()},
                     (tuple(float(v) for v in x), float(t)))


def load_config(path=None) -> RunConfig:
    """Read and validate a JSON config file (defaults when ``path`` is None)."""
    if path is None:
        return parse_config({})
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(doc)


# ---------------------------------------------------------------------------
# output


def write_csv(path: Path, header, rows) -> Path:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header=",".join(header), comments="")
    return path


def write_json(path: Path, doc) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def _coord_names(prefix: str, N: int):
    return [f"{prefix}_{i + 1}" for i in range(N)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(cfg: RunConfig, args) -> int:
    chosen = tuple(args.suite) if args.suite else cfg.suites
    for s in chosen:
        if s not in suites.SUITES:
            raise ConfigError(f"--suite: unknown suite {s!r}; known: {', '.join(suites.SUITES)}")
    reports = []
    for name in chosen:
        rep = suites.run_suite(name, cfg.context, cfg.seed, cfg.tolerances)
        reports.append(rep)
        status = "pass" if rep["pass"] else "FAIL"
        print(f"{name:12s} {status}  worst {rep['worst_check']} = {rep['worst_residual']:.3e}")
    ok = all(r["pass"] for r in reports)
    meta = cfg.to_json()
    meta["suites"] = list(chosen)
    write_json(cfg.out / "summary.json", {"config": meta, "pass": ok, "suites": reports})
    names = []
    for r in reports:
        for c in r["checks"]:
            names.append((r["suite"], c["name"], c["residual"], c["tolerance"], c["pass"]))
    (cfg.out / "checks.csv").write_text(
        "suite,check,residual,tolerance,pass\n"
        + "".join(f"{s},{n},{res:.17g},{tol:.17g},{int(p)}\n" for s, n, res, tol, p in names))
    if "nodes" in (args.emit or []):
        x, t = cfg.sigma_point
        table = suites.sigma_nodes_table(cfg.context, x, t)
        write_csv(cfg.out / "sigma_nodes.csv", _coord_names("xi", cfg.context.N) + ["weight"], table)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_kernel(cfg: RunConfig, args) -> int:
    ctx = cfg.context
    u = np.eye(ctx.N)[0]
    v = np.ones(ctx.N) / math.sqrt(ctx.N)
    rows = []
    for a in np.linspace(0.0, 3.0, 7):
        for b in np.linspace(0.0, 3.0, 7):
            ev = kernels.kernel_b1(ctx, a * u, b * v)
            res = kernels.eigen_residual(ctx, a * u, b * v) if a > 0 and b > 0 else 0.0
            rows.append((a, b, ev.value, ev.error_estimate, res))
    write_csv(cfg.out / "kernel.csv", ["x_scale", "xi_scale", "value", "error_estimate",
                                       "eigen_residual"], rows)
    return EXIT_OK


def cmd_transform(cfg: RunConfig, args) -> int:
    ctx = cfg.context
    f = dataclasses.replace(transforms.laguerre_packet(ctx, [1.0, 0.5, -0.3]), closed_transform=None)
    hat = transforms.fourier_k1_radial(ctx, f)
    back = transforms.fourier_k1_radial(ctx, dataclasses.replace(hat, closed_transform=None))
    r = np.linspace(0.0, 8.0, 33)
    fv, hv, bv = f(r), hat(r), back(r)
    write_csv(cfg.out / "transform.csv", ["r", "f", "Ff", "FFf", "residual"],
              np.column_stack([r, fv, hv, bv, np.abs(bv - fv)]))
    return EXIT_OK


def cmd_translate(cfg: RunConfig, args) -> int:
    ctx = cfg.context
    x = np.asarray(cfg.sigma_point[0])
    f0 = lambda s: np.exp(-np.asarray(s, dtype=float))
    u = np.eye(ctx.N)[0]
    rows = []
    for c in np.linspace(-3.0, 3.0, 25):
        y = c * u
        rows.append(tuple(y) + (translation.translate_radial(ctx, f0, x, y),))
    write_csv(cfg.out / "translate.csv", _coord_names("y", ctx.N) + ["tau_f"], rows)
    if "nodes" in (args.emit or []):
        mu = translation.rho_measure(ctx, x, u)
        write_csv(cfg.out / "rho_nodes.csv", ["radius", "weight"], np.column_stack([mu.nodes, mu.weights]))
    return EXIT_OK


def cmd_sphmean(cfg: RunConfig, args) -> int:
    ctx = cfg.context
    rng = np.random.default_rng(cfg.seed)
    x, t = cfg.sigma_point
    mu = sphmean.sigma_measure(ctx, np.asarray(x), t)
    write_csv(cfg.out / "sigma_nodes.csv", _coord_names("xi", ctx.N) + ["weight"],
              np.column_stack([mu.nodes, mu.weights]))
    rows = []
    for z in rng.uniform(-2, 2, (5, ctx.N)):
        rows.append(tuple(x) + (t,) + tuple(z) +
                    (sphmean.product_formula_residual(ctx, x, t, z, measure=mu),))
    write_csv(cfg.out / "product_formula.csv",
              _coord_names("x", ctx.N) + ["t"] + _coord_names("z", ctx.N) + ["residual"], rows)
    fam = [translation.radial_bump(5.0, center=c, width=0.2) for c in np.linspace(0.25, 2.0, 6)]
    grid = [(rng.uniform(-2, 2, ctx.N), float(rng.uniform(0, 3))) for _ in range(20)]
    tol = cfg.tolerances.get("positivity", suites.DEFAULT_TOLERANCES["positivity"])
    rep = sphmean.positivity_scan(ctx, fam, grid, tol=tol)
    write_json(cfg.out / "positivity.json", {
        "minimum": rep.minimum, "pass": rep.passed, "evaluations": rep.evaluations,
        "worst": [{"value": v, "family_index": i, "x": list(p), "t": tt} for v, i, p, tt in rep.worst],
        "sigma_mass": mu.total_mass})
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_geodesic(cfg: RunConfig, args) -> int:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for i in range(5):
        x = rng.uniform(0.5, 2, 2)
        x0 = -rng.uniform(0.5, 2, 2) * np.array([1.0, -1.0])
        exact = math.sqrt(2) * geometry.metric_d(x, x0)
        g = geometry.graph_geodesic(x, x0, n=200)
        rows.append((i, *x, *x0, exact, g, (g - exact) / exact))
    write_csv(cfg.out / "geodesic.csv", ["pair", "x_1", "x_2", "x0_1", "x0_2", "sqrt2_d", "graph",
                                         "gap"], rows)
    return EXIT_OK


def _wave_data(ctx):
    return transforms.laguerre_packet(ctx, [1.0, 0.5, -0.3]), transforms.laguerre_packet(ctx, [0.2, -0.4])


def cmd_wave(cfg: RunConfig, args) -> int:
    ctx = cfg.context
    f, g = _wave_data(ctx)
    r = np.linspace(0.0, 6.0, 25)
    rows = [(t, ri, ui) for t in np.linspace(0.0, 3.0, 13)
            for ri, ui in zip(r, wave.wave_profile(ctx, f, g, r, t))]
    write_csv(cfg.out / "wave.csv", ["t", "r", "u"], rows)
    return EXIT_OK


def cmd_huygens(cfg: RunConfig, args) -> int:
    ctx = cfg.context
    x = np.eye(ctx.N)[0] * 2.25
    t, width = 0.8, 0.15
    tol = cfg.tolerances.get("huygens", suites.DEFAULT_TOLERANCES["huygens"])
    cases = []
    for c in (0.2, 0.35, 2.5, 2.8):
        outside = wave.shell_outside_domain(x, t, c, width)
        passed, val = wave.huygens_check(ctx, translation.radial_bump(10.0, center=c, width=width), x, t,
                                         tol=tol)
        cases.append({"center": c, "width": width, "x": list(x), "t": t, "outside": outside,
                      "value": val, "pass": bool(outside and passed)})
    ok = all(c["pass"] for c in cases)
    write_json(cfg.out / "huygens.json", {"cases": cases, "pass": ok, "tolerance": tol})
    print("huygens", "pass" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_energy(cfg: RunConfig, args) -> int:
    ctx = cfg.context
    f, g = _wave_data(ctx)
    ts = np.linspace(0.0, 1.4, 8)
    cols = [ts, [wave.multiplier_energy(ctx, f, t) for t in ts]]
    header = ["t", "multiplier_energy"]
    if ctx.N == 2:
        x0, t0 = np.array([2.0, 1.0]), 1.5
        cols.append([wave.wave_energy(ctx, f, g, x0, t0, t) for t in ts])
        header.append("cone_energy")
    write_csv(cfg.out / "energy.csv", header, np.column_stack(cols))
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "kernel": cmd_kernel,
    "transform": cmd_transform,
    "translate": cmd_translate,
    "sphmean": cmd_sphmean,
    "geodesic": cmd_geodesic,
    "wave": cmd_wave,
    "huygens": cmd_huygens,
    "energy": cmd_energy,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="khankel", description="k-Hankel analysis toolkit and checks")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH", help="JSON config file")
        sp.add_argument("--seed", type=int, help="random seed (overrides the config)")
        sp.add_argument("--out", metavar="DIR", help="report directory (overrides the config)")
        sp.add_argument("--emit", action="append", choices=["nodes"],
                        help="also write node dumps")
        if name == "check":
            sp.add_argument("--suite", action="append", metavar="NAME",
                            help="run only this suite (repeatable)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be nonnegative")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out=Path(args.out))
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, AdmissibilityError) as exc:
        print(f"khankel: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"khankel: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
