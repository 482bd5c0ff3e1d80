"""Exact planar convex geometry for hull functionals.

Convex hulls (monotone chain), perimeter, diameter (rotating calipers),
area, support/range functions, angular-quadrature cross-checks of the
integral formulas for perimeter and diameter, and the Hausdorff distance
between convex polygons.

Degenerate hulls are first-class citizens: a single point has perimeter 0
and diameter 0; a segment has diameter equal to its length and perimeter
equal to twice its length (the convention forced by consistency with the
range-function integral over [0, pi]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

# Relative tolerance of the orientation predicate.  The collinearity
# threshold is homogeneous of degree 2 in the coordinates, so predicate
# decisions are invariant under power-of-two rescaling of all inputs.
ORIENT_EPS = 1e-12

# Pruning before the hull scan only pays off above this point count.
_PRUNE_THRESHOLD = 64


class Point2(NamedTuple):
    """A planar vector; doubles as walk increment and drift vector."""

    x: float
    y: float


def _as_coords(points: Iterable[Point2] | np.ndarray) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 2:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (N, 2) point array, got shape {arr.shape}")
    return arr


def _cross(ox: float, oy: float, ax: float, ay: float, bx: float, by: float) -> float:
    """Signed area of the parallelogram spanned by (a-o) and (b-o)."""
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def _orient_tol(ox: float, oy: float, ax: float, ay: float, bx: float, by: float) -> float:
    return ORIENT_EPS * (abs(ax - ox) + abs(ay - oy)) * (abs(bx - ox) + abs(by - oy))


def _chain(pts: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Monotone chain over lexicographically sorted distinct points, ccw.

    Pops collinear-within-tolerance triples, so the output is strictly
    convex (or a 1- or 2-point degenerate chain).
    """
    n = len(pts)
    if n <= 2:
        return list(pts)
    eps = ORIENT_EPS

    def build(seq):
        out: list[tuple[float, float]] = []
        for p in seq:
            px, py = p
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                ux = ax - ox
                uy = ay - oy
                vx = px - ox
                vy = py - oy
                cross = ux * vy - uy * vx
                if cross <= 0.0:
                    out.pop()
                    continue
                # tolerance drop: only a point between its neighbours may be
                # treated as collinear, otherwise a sliver endpoint far from
                # the o-p segment could be lost
                if cross <= eps * (abs(ux) + abs(uy)) * (abs(vx) + abs(vy)):
                    dot = ux * vx + uy * vy
                    if 0.0 <= dot <= vx * vx + vy * vy:
                        out.pop()
                        continue
                break
            out.append(p)
        return out

    lower = build(pts)
    upper = build(reversed(pts))
    return lower[:-1] + upper[:-1]


def _prune_pass(arr: np.ndarray, directions: int) -> np.ndarray:
    """Directional-extremes filter: points strictly inside the polygon of
    the K directional support points can never be hull vertices and are
    dropped.  The positive margin keeps the filter conservative and is
    homogeneous of degree 2, so pruning decisions survive exact
    power-of-two rescaling."""
    th = np.linspace(0.0, 2.0 * math.pi, directions, endpoint=False)
    proj = arr @ np.stack([np.cos(th), np.sin(th)])
    corner_idx = np.unique(proj.argmax(axis=0))
    corners = sorted(map(tuple, arr[corner_idx].tolist()))
    hull = _chain(corners)
    if len(hull) < 3:
        return arr
    hv = np.array(hull)
    edge = np.roll(hv, -1, axis=0) - hv
    # cross(edge_i, p - v_i) per edge and point, shape (E, N)
    dx = arr[:, 0][None, :] - hv[:, 0][:, None]
    dy = arr[:, 1][None, :] - hv[:, 1][:, None]
    cr = edge[:, 0][:, None] * dy - edge[:, 1][:, None] * dx
    scale = float(np.abs(arr).max())
    margin = 1e-9 * scale * scale
    keep = (cr <= margin).any(axis=0)
    return arr[keep]


def _prune_candidates(arr: np.ndarray) -> np.ndarray:
    """Coarse-then-fine candidate reduction before the hull scan."""
    arr = _prune_pass(arr, 8)
    if len(arr) > 4 * _PRUNE_THRESHOLD:
        arr = _prune_pass(arr, 64)
    return arr


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Counterclockwise, strictly convex vertex list; may degenerate to a
    segment (2 vertices) or a single point."""

    vertices: tuple[Point2, ...]

    def __post_init__(self) -> None:
        v = self.vertices
        if len(v) == 0:
            raise ValueError("a polygon needs at least one vertex")
        for p in v:
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise ValueError(f"non-finite vertex {p}")
        if len(v) == 2 and v[0] == v[1]:
            raise ValueError("degenerate segment with coincident endpoints")
        if len(v) >= 3:
            n = len(v)
            for i in range(n):
                o, a, b = v[i], v[(i + 1) % n], v[(i + 2) % n]
                if _cross(o.x, o.y, a.x, a.y, b.x, b.y) <= 0.0:
                    raise ValueError(
                        f"vertices are not in strictly convex ccw order at index {i}"
                    )

    @cached_property
    def coords(self) -> np.ndarray:
        arr = np.array(self.vertices, dtype=np.float64)
        arr.setflags(write=False)
        return arr

    def __len__(self) -> int:
        return len(self.vertices)

    def scaled(self, factor: float) -> "ConvexPolygon":
        """Polygon with every vertex multiplied by ``factor`` (> 0)."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return ConvexPolygon(tuple(Point2(p.x * factor, p.y * factor) for p in self.vertices))


@dataclass(frozen=True)
class AngleGrid:
    """Uniform grid theta_j = j*pi/count, j = 0..count, over [0, pi]."""

    count: int

    def __post_init__(self) -> None:
        if self.count < 2:
            raise ValueError("angle grid needs count >= 2")

    @cached_property
    def thetas(self) -> np.ndarray:
        t = np.linspace(0.0, math.pi, self.count + 1)
        t.setflags(write=False)
        return t


def convex_hull(points: Iterable[Point2] | np.ndarray) -> ConvexPolygon:
    """Convex hull of a nonempty finite point set.

    Interior and collinear-boundary points are dropped; collinear input
    collapses to a 2-vertex segment, coincident input to a single point.
    """
    arr = _as_coords(points)
    if arr.shape[0] == 0:
        raise ValueError("cannot take the hull of an empty point set")
    if not np.isfinite(arr).all():
        raise ValueError("points contain NaN or infinity")
    if arr.shape[0] > _PRUNE_THRESHOLD:
        arr = _prune_candidates(arr)
    order = np.lexsort((arr[:, 1], arr[:, 0]))
    srt = arr[order]
    if len(srt) > 1:
        fresh = np.concatenate([[True], (srt[1:] != srt[:-1]).any(axis=1)])
        srt = srt[fresh]
    hull = _chain(list(map(tuple, srt.tolist())))
    return ConvexPolygon(tuple(Point2(px, py) for px, py in hull))


def perimeter(poly: ConvexPolygon) -> float:
    """Boundary length; a segment counts both traversals (2x length)."""
    v = poly.coords
    n = len(v)
    if n == 1:
        return 0.0
    if n == 2:
        return 2.0 * float(np.hypot(v[1, 0] - v[0, 0], v[1, 1] - v[0, 1]))
    edges = np.roll(v, -1, axis=0) - v
    return float(np.hypot(edges[:, 0], edges[:, 1]).sum())


def area(poly: ConvexPolygon) -> float:
    """Shoelace area; zero for degenerate polygons."""
    v = poly.coords
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def diameter(poly: ConvexPolygon) -> float:
    """Largest vertex-pair distance via rotating calipers, O(V)."""
    v = poly.coords
    n = len(v)
    if n == 1:
        return 0.0
    if n == 2:
        return float(np.hypot(v[1, 0] - v[0, 0], v[1, 1] - v[0, 1]))
    xs = v[:, 0]
    ys = v[:, 1]
    best = 0.0
    j = 1
    for i in range(n):
        i2 = i + 1 if i + 1 < n else 0
        ex = xs[i2] - xs[i]
        ey = ys[i2] - ys[i]
        # advance the antipodal vertex while it still moves away from edge i
        while True:
            j2 = j + 1 if j + 1 < n else 0
            if ex * (ys[j2] - ys[j]) - ey * (xs[j2] - xs[j]) > 0.0:
                j = j2
            else:
                break
        d1 = math.hypot(xs[j] - xs[i], ys[j] - ys[i])
        d2 = math.hypot(xs[j] - xs[i2], ys[j] - ys[i2])
        if d1 > best:
            best = d1
        if d2 > best:
            best = d2
    return best


def support(poly: ConvexPolygon, theta: float) -> tuple[float, float]:
    """Max and min projections of the polygon onto direction e_theta."""
    if not math.isfinite(theta):
        raise ValueError("angle must be finite")
    v = poly.coords
    dots = v[:, 0] * math.cos(theta) + v[:, 1] * math.sin(theta)
    return float(dots.max()), float(dots.min())


def range_fn(poly: ConvexPolygon, theta: float) -> float:
    """Projected width M(theta) - m(theta); nonnegative."""
    big, small = support(poly, theta)
    return big - small


def support_profile(poly: ConvexPolygon, thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (M(theta), m(theta)) over an array of angles."""
    directions = np.stack([np.cos(thetas), np.sin(thetas)])
    proj = poly.coords @ directions
    return proj.max(axis=0), proj.min(axis=0)


def _simpson_weights(count: int) -> np.ndarray:
    """Composite-Simpson weights on count uniform panels (count+1 nodes).

    Odd panel counts close with a 3/8 rule on the last three panels.
    """
    w = np.zeros(count + 1)
    if count % 2 == 0:
        w[0] = w[count] = 1.0
        w[1:count:2] = 4.0
        w[2:count:2] = 2.0
        w /= 3.0
    else:
        head = count - 3
        if head > 0:
            w[0] = w[head] = 1.0 / 3.0
            w[1:head:2] += 4.0 / 3.0
            w[2:head:2] += 2.0 / 3.0
        w[head] += 3.0 / 8.0
        w[head + 1] += 9.0 / 8.0
        w[head + 2] += 9.0 / 8.0
        w[count] += 3.0 / 8.0
    return w


def cauchy_perimeter(poly: ConvexPolygon, grid: AngleGrid) -> float:
    """Quadrature of the projected width over [0, pi].

    Converges to ``perimeter(poly)`` under grid refinement; the integrand
    has kinks at vertex-normal angles, so convergence is slower than for
    smooth integrands.
    """
    big, small = support_profile(poly, grid.thetas)
    h = math.pi / grid.count
    return float(h * np.dot(_simpson_weights(grid.count), big - small))


def cauchy_diameter(poly: ConvexPolygon, grid: AngleGrid) -> float:
    """Largest projected width over the grid; a lower bound on the true
    diameter with gap O(diam * (pi/count)^2)."""
    big, small = support_profile(poly, grid.thetas)
    return float((big - small).max())


def _segment_distance(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> float:
    vx, vy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    vv = vx * vx + vy * vy
    if vv == 0.0:
        return math.hypot(wx, wy)
    t = (wx * vx + wy * vy) / vv
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(wx - t * vx, wy - t * vy)


def distance_to_polygon(p: Point2, poly: ConvexPolygon) -> float:
    """Euclidean distance from a point to a convex polygon (0 inside)."""
    v = poly.vertices
    n = len(v)
    if n == 1:
        return math.hypot(p.x - v[0].x, p.y - v[0].y)
    if n >= 3:
        inside = True
        for i in range(n):
            a = v[i]
            b = v[(i + 1) % n]
            cr = _cross(a.x, a.y, b.x, b.y, p.x, p.y)
            if cr < -_orient_tol(a.x, a.y, b.x, b.y, p.x, p.y):
                inside = False
                break
        if inside:
            return 0.0
        return min(
            _segment_distance(p.x, p.y, v[i].x, v[i].y, v[(i + 1) % n].x, v[(i + 1) % n].y)
            for i in range(n)
        )
    return _segment_distance(p.x, p.y, v[0].x, v[0].y, v[1].x, v[1].y)


def hausdorff(a: ConvexPolygon, b: ConvexPolygon) -> float:
    """Hausdorff distance between two convex polygons.

    Point-to-convex-set distance is convex, so each directed supremum is
    attained at a vertex; the result is exact.  Not valid for non-convex
    inputs (which the polygon type cannot represent).
    """
    d_ab = max(distance_to_polygon(p, b) for p in a.vertices)
    d_ba = max(distance_to_polygon(p, a) for p in b.vertices)
    return max(d_ab, d_ba)
