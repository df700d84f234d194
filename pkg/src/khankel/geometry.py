"""The metric d(x, y), orbit distances, metric balls and a grid-geodesic
oracle for the conformal metric |dx| / sqrt(2|x|)."""

from __future__ import annotations

import math
from math import gcd

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .dunkl import DunklContext, orbit
from .specfun import gauss_legendre

__all__ = [
    "metric_d",
    "orbit_distance",
    "in_ball",
    "riemannian_2d_closed",
    "graph_geodesic",
    "eikonal_residual",
    "triangle_defect",
    "GeometryError",
]

RADICAND_TOL = 1e-12


class GeometryError(ValueError):
    """Numeric fault or a query outside the domain of a geometric oracle."""


def metric_d(x, y):
    """d(x, y) = sqrt(|x| + |y| - sqrt(2(|x||y| + <x, y>))); broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rx = np.linalg.norm(x, axis=-1)
    ry = np.linalg.norm(y, axis=-1)
    inner = np.sum(x * y, axis=-1)
    rad = 2 * (rx * ry + inner)
    scale = np.maximum(1.0, rx * ry)
    if np.any(rad < -RADICAND_TOL * scale):
        raise GeometryError("negative inner radicand in metric_d")
    outer = rx + ry - np.sqrt(np.clip(rad, 0, None))
    if np.any(outer < -RADICAND_TOL * np.maximum(1.0, rx + ry)):
        raise GeometryError("negative outer radicand in metric_d")
    out = np.sqrt(np.clip(outer, 0, None))
    return float(out) if out.ndim == 0 else out


def orbit_distance(ctx: DunklContext, x, y) -> float:
    """min over the group of d(gx, y)."""
    return float(np.min(metric_d(orbit(ctx, x), np.asarray(y, dtype=float))))


def in_ball(ctx: DunklContext, xi, x, r: float, union: bool = False, tol: float = 1e-12) -> bool:
    """d(xi, x) <= r, or d(xi, gx) <= r for some g when ``union`` is set."""
    dist = orbit_distance(ctx, x, xi) if union else metric_d(xi, x)
    return bool(dist <= r + tol)


def riemannian_2d_closed(x, x0) -> float:
    """sqrt(2(|x| + |x0| - 2 sqrt(|x||x0|) cos(alpha/2))), alpha the angle between x and x0."""
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if x.shape != (2,) or x0.shape != (2,):
        raise ValueError("riemannian_2d_closed is defined in the plane")
    rx, r0 = np.linalg.norm(x), np.linalg.norm(x0)
    if rx == 0 or r0 == 0:
        return math.sqrt(2 * (rx + r0))
    # atan2 of cross and dot keeps the half-angle accurate near 0 and pi
    alpha = math.atan2(abs(x[0] * x0[1] - x[1] * x0[0]), float(x @ x0))
    return math.sqrt(max(2 * (rx + r0 - 2 * math.sqrt(rx * r0) * math.cos(alpha / 2)), 0.0))


def triangle_defect(x, y, z):
    """sqrt2 d(x, z) - sqrt2 d(x, y) - sqrt2 d(y, z); nonpositive when the triangle inequality holds."""
    s = math.sqrt(2)
    return s * (metric_d(x, z) - metric_d(x, y) - metric_d(y, z))


# ---------------------------------------------------------------------------
# grid geodesic


def _moves(reach: int):
    out = []
    for i in range(-reach, reach + 1):
        for j in range(-reach, reach + 1):
            if (i, j) != (0, 0) and gcd(abs(i), abs(j)) == 1:
                out.append((i, j))
    return out


def _segment_cost(P, Q, gl_nodes, gl_weights):
    """Gauss-Legendre line integral of 1/sqrt(2|p|) from P to Q (rows)."""
    d = Q - P
    length = np.linalg.norm(d, axis=-1)
    s = (1 + gl_nodes) / 2
    pts = P[:, None, :] + s[None, :, None] * d[:, None, :]
    r = np.linalg.norm(pts, axis=-1)
    return length * ((gl_weights / 2) @ (1 / np.sqrt(2 * r)).T)


def _segment_clearance(P, Q):
    """Distance from the origin to each segment P-Q."""
    d = Q - P
    dd = np.einsum("ij,ij->i", d, d)
    s = np.clip(-np.einsum("ij,ij->i", P, d) / np.where(dd > 0, dd, 1.0), 0, 1)
    return np.linalg.norm(P + s[:, None] * d, axis=-1)


def graph_geodesic(x, x0, n: int = 400, reach: int = 3, box=None, link_radius=None,
                   gl_order: int = 8) -> float:
    """Shortest path length for |dx|/sqrt(2|x|) on a uniform n x n grid graph.

    Nodes are joined by straight moves (i, j) with coprime |i|, |j| <= reach;
    each edge costs the Gauss-Legendre line integral of the conformal factor.
    The endpoints are extra nodes linked to every grid node within
    ``link_radius`` (default ``reach`` cells). Edges passing within two cells
    of the origin are removed. Every edge is a genuine path, so the result
    is an upper bound for the Riemannian distance up to quadrature error.
    """
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if x.shape != (2,) or x0.shape != (2,):
        raise ValueError("graph_geodesic works in the plane")
    if box is None:
        pts = np.stack([x, x0, np.zeros(2)])
        lo, hi = pts.min(0), pts.max(0)
        span = float(max(hi - lo))
        c = (lo + hi) / 2
        half = 0.6 * span
        box = (c[0] - half, c[0] + half, c[1] - half, c[1] + half)
    x_lo, x_hi, y_lo, y_hi = box
    h = max(x_hi - x_lo, y_hi - y_lo) / (n - 1)
    clear = 2 * h
    if min(np.linalg.norm(x), np.linalg.norm(x0)) < clear:
        raise GeometryError("endpoints must stay at least two grid cells away from the origin")
    if link_radius is None:
        link_radius = reach * h
    gx = x_lo + h * np.arange(n)
    gy = y_lo + h * np.arange(n)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    coords = np.stack([X.ravel(), Y.ravel()], axis=1)
    idx = np.arange(n * n).reshape(n, n)
    gl = gauss_legendre(gl_order)
    rows, cols, vals = [], [], []
    for di, dj in _moves(reach):
        if di < 0 or (di == 0 and dj < 0):
            continue  # the graph is undirected; each move once
        a = idx[max(0, -di):n - max(0, di), max(0, -dj):n - max(0, dj)].ravel()
        b = idx[max(0, di):n - max(0, -di) or None, max(0, dj):n - max(0, -dj) or None].ravel()
        P, Q = coords[a], coords[b]
        ok = _segment_clearance(P, Q) > clear
        cost = _segment_cost(P[ok], Q[ok], gl.nodes, gl.weights)
        rows.append(a[ok])
        cols.append(b[ok])
        vals.append(cost)
    src, dst = n * n, n * n + 1
    for node, end in ((src, x), (dst, x0)):
        near = np.flatnonzero(np.linalg.norm(coords - end, axis=1) <= link_radius + 1e-12)
        P = np.broadcast_to(end, (len(near), 2))
        Q = coords[near]
        ok = (_segment_clearance(P, Q) > clear) & (np.linalg.norm(Q - P, axis=1) > 0)
        rows.append(np.full(ok.sum(), node))
        cols.append(near[ok])
        vals.append(_segment_cost(P[ok], Q[ok], gl.nodes, gl.weights))
    # the endpoints may be joined directly when they are close
    if np.linalg.norm(x - x0) <= link_radius and _segment_clearance(x[None], x0[None])[0] > clear:
        rows.append(np.array([src]))
        cols.append(np.array([dst]))
        vals.append(_segment_cost(x[None], x0[None], gl.nodes, gl.weights))
    G = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                   shape=(n * n + 2, n * n + 2)).tocsr()
    dist = dijkstra(G, directed=False, indices=src)
    return float(dist[dst])


# ---------------------------------------------------------------------------
# eikonal equation


def eikonal_residual(x0, x, step: float = 1e-5, kink_tol: float = 1e-6) -> float:
    """| |grad_x sqrt2 d(x, x0)| - 1/sqrt(2|x|) | by central differences of step ``step``*|x|."""
    x0 = np.asarray(x0, dtype=float)
    x = np.asarray(x, dtype=float)
    rx, r0 = np.linalg.norm(x), np.linalg.norm(x0)
    if rx == 0:
        raise GeometryError("eikonal residual needs x != 0")
    if r0 > 0 and float(x @ x0) / (rx * r0) < -1 + kink_tol:
        raise GeometryError("x is opposite-collinear with x0, where the distance has a kink")
    if metric_d(x, x0) < 1e3 * step * max(rx, 1.0):
        raise GeometryError("x too close to x0, where the distance is not differentiable")
    h = step * rx
    grad = np.empty(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        grad[i] = (metric_d(x + e, x0) - metric_d(x - e, x0)) / (2 * h)
    return abs(math.sqrt(2) * float(np.linalg.norm(grad)) - 1 / math.sqrt(2 * rx))
