"""Shared test helpers: independent brute-force oracles and hull generators."""

from __future__ import annotations

import numpy as np

from walkhull.geometry import ConvexPolygon, convex_hull


def brute_force_diameter(poly: ConvexPolygon) -> float:
    """O(V^2) pairwise maximum distance over the vertices."""
    v = poly.coords
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1)).max())


def _boundary_samples(poly: ConvexPolygon, per_edge: int) -> np.ndarray:
    v = poly.coords
    if len(v) == 1:
        return v
    pts = []
    n = len(v)
    closed = n >= 3
    edges = n if closed else n - 1
    for i in range(edges):
        a = v[i]
        b = v[(i + 1) % n]
        t = np.linspace(0.0, 1.0, per_edge, endpoint=False)[:, None]
        pts.append(a + t * (b - a))
    return np.vstack(pts)


def dense_hausdorff(a: ConvexPolygon, b: ConvexPolygon, per_edge: int = 400) -> float:
    """Hausdorff distance by dense boundary sampling (approximate oracle).

    Both directed distances are computed point-cloud to point-cloud, so
    the result overestimates by at most about one sample spacing."""
    pa = _boundary_samples(a, per_edge)
    pb = _boundary_samples(b, per_edge)
    d2 = ((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=-1)
    d_ab = np.sqrt(d2.min(axis=1)).max()
    d_ba = np.sqrt(d2.min(axis=0)).max()
    return float(max(d_ab, d_ba))


def ellipse_hull(rng: np.random.Generator, max_vertices: int = 200) -> ConvexPolygon:
    """Random rotated ellipse sampled at up to max_vertices angles; nearly
    all sampled points are extreme, giving many-vertex hulls."""
    k = int(rng.integers(20, max_vertices + 1))
    th = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=k))
    a, b = rng.uniform(0.5, 10.0, size=2)
    phi = rng.uniform(0.0, np.pi)
    pts = np.stack([a * np.cos(th), b * np.sin(th)], axis=1)
    rot = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
    return convex_hull(pts @ rot.T + rng.uniform(-5, 5, size=2))


def cloud_hull(rng: np.random.Generator, n: int = 200) -> ConvexPolygon:
    """Hull of a gaussian cloud (few vertices, generic positions)."""
    return convex_hull(rng.normal(scale=rng.uniform(0.5, 5.0), size=(n, 2)))
