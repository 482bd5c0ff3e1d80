"""Closed-form limit objects for the hull growth laws.

Given the two drift vectors this module derives the angles and unit vectors
that control the limiting behavior of the hull perimeter and diameter,
checks the two structural assumptions (no degenerate side in the drift
triangle; a unique longest side), and evaluates the limiting variance rates
sigma_L^2 and sigma_D^2 together with the linear approximation sums whose
partial sums drive the central limit behavior.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from walkhull.geometry import ConvexPolygon, Point2, convex_hull, diameter, perimeter
from walkhull.walks import Ensemble, StepDistribution

# Relative tolerance for norm comparisons in the assumption checks, and the
# wider margin that triggers a near-degeneracy warning (Gaussian convergence
# degrades long before the assumptions actually fail).
NORM_RTOL = 1e-9
NEAR_TIE_RTOL = 1e-6


class AssumptionViolation(ValueError):
    """Raised when an operation requires a structural assumption that the
    supplied drift configuration does not satisfy."""


def _unit(theta: float) -> Point2:
    return Point2(math.cos(theta), math.sin(theta))


def _polar_angle(v: Point2) -> float:
    """Angle in [0, 2*pi); the zero vector maps to 0 by convention."""
    if v.x == 0.0 and v.y == 0.0:
        return 0.0
    a = math.atan2(v.y, v.x)
    return a + 2.0 * math.pi if a < 0.0 else a


@dataclass(frozen=True)
class DriftGeometry:
    """Derived angles, unit vectors and assumption flags for a drift pair.

    ``theta0`` is the direction along which both drifts project equally
    (NaN when the drifts coincide and no such direction is defined);
    ``e_theta0_perp`` is the unit normal of that direction, signed so that
    its projection on the first drift direction is nonnegative.
    ``a2_max`` identifies the unique longest side of the drift triangle
    ("mu1" | "mu2" | "diff"), or None when there is a tie.
    """

    mu1: Point2
    mu2: Point2
    theta1: float
    theta2: float
    theta0: float
    e_theta0_perp: Point2 | None
    a1_holds: bool
    a2_max: str | None

    @property
    def e1(self) -> Point2:
        return _unit(self.theta1)

    @property
    def e2(self) -> Point2:
        return _unit(self.theta2)

    @property
    def a2_holds(self) -> bool:
        return self.a2_max is not None


def drift_geometry(mu1: Sequence[float], mu2: Sequence[float]) -> DriftGeometry:
    """Derive the drift geometry and evaluate both assumptions.

    Norm comparisons use relative tolerance ``NORM_RTOL``; near-ties emit a
    near-degenerate warning because convergence to the Gaussian regime is
    empirically slow close to an assumption boundary.
    """
    m1 = Point2(float(mu1[0]), float(mu1[1]))
    m2 = Point2(float(mu2[0]), float(mu2[1]))
    if not all(map(math.isfinite, (*m1, *m2))):
        raise ValueError("drift vectors must be finite")

    theta1 = _polar_angle(m1)
    theta2 = _polar_angle(m2)
    diff = Point2(m1.x - m2.x, m1.y - m2.y)
    norms = {
        "mu1": math.hypot(*m1),
        "mu2": math.hypot(*m2),
        "diff": math.hypot(*diff),
    }
    scale = max(norms.values())

    a1_holds = scale > 0.0 and min(norms.values()) > NORM_RTOL * scale
    if a1_holds and min(norms.values()) <= NEAR_TIE_RTOL * scale:
        warnings.warn(
            "near-degenerate drift configuration: one side of the drift "
            f"triangle has relative length {min(norms.values()) / scale:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
    ranked = sorted(norms.items(), key=lambda kv: kv[1], reverse=True)
    if scale == 0.0 or ranked[0][1] - ranked[1][1] <= NORM_RTOL * scale:
        a2_max = None
    else:
        a2_max = ranked[0][0]
        if ranked[0][1] - ranked[1][1] <= NEAR_TIE_RTOL * scale:
            warnings.warn(
                "near-degenerate drift configuration: the two longest sides "
                f"of the drift triangle differ by {ranked[0][1] - ranked[1][1]:.3e}",
                RuntimeWarning,
                stacklevel=2,
            )

    if norms["diff"] <= NORM_RTOL * max(scale, 1e-300):
        # equal drifts: the equal-projection direction is undefined
        return DriftGeometry(m1, m2, theta1, theta2, math.nan, None, False, a2_max)

    # theta0 is orthogonal to mu1 - mu2; take the representative in [0, pi).
    theta0 = (_polar_angle(diff) + 0.5 * math.pi) % math.pi
    e0 = _unit(theta0)
    # rotate by -pi/2: exactly orthogonal to e0 by construction
    perp = Point2(e0.y, -e0.x)
    e1 = _unit(theta1)
    e2 = _unit(theta2)
    d1 = perp.x * e1.x + perp.y * e1.y
    if abs(d1) <= 1e-12:
        # first drift parallel to the equal-projection line: the sign
        # constraint is vacuous, break the tie against the second drift
        warnings.warn(
            "sign of the equal-projection normal is not pinned by the first "
            "drift; tie broken so its projection on the second drift is <= 0",
            RuntimeWarning,
            stacklevel=2,
        )
        if perp.x * e2.x + perp.y * e2.y > 0.0:
            perp = Point2(-perp.x, -perp.y)
    elif d1 < 0.0:
        perp = Point2(-perp.x, -perp.y)

    return DriftGeometry(m1, m2, theta1, theta2, theta0, perp, a1_holds, a2_max)


@dataclass(frozen=True)
class LimitShape:
    """Hull of the origin and the drift vectors, with its functionals.

    This is the shape the rescaled trajectory hull converges to; it can
    degenerate to a segment or a point."""

    polygon: ConvexPolygon
    per: float
    diam: float


def limit_shape(drifts: Sequence[Sequence[float]]) -> LimitShape:
    """Limit of hull/n for walks with the given drifts: the hull of the
    origin together with all drift vectors."""
    pts = [Point2(0.0, 0.0)] + [Point2(float(d[0]), float(d[1])) for d in drifts]
    poly = convex_hull(pts)
    return LimitShape(poly, perimeter(poly), diameter(poly))


def _quad_form(cov: np.ndarray, u: Point2, v: Point2) -> float:
    """u^T cov v - exact covariance of the projections for any law."""
    uu = np.array(u)
    vv = np.array(v)
    return float(uu @ cov @ vv)


def sigma_L2(d1: StepDistribution, d2: StepDistribution, g: DriftGeometry) -> float:
    """Limiting value of Var[perimeter]/n.

    Evaluated exactly from the step covariances as quadratic forms; equals
    the variance of one term of the perimeter approximation sum.
    """
    if not g.a1_holds:
        raise AssumptionViolation(
            "perimeter variance rate requires nonzero drifts with distinct directions"
        )
    s1 = d1.covariance
    s2 = d2.covariance
    e1, e2, ep = g.e1, g.e2, g.e_theta0_perp
    return (
        _quad_form(s1, e1, e1)
        + _quad_form(s1, ep, ep)
        + 2.0 * _quad_form(s1, e1, ep)
        + _quad_form(s2, e2, e2)
        + _quad_form(s2, ep, ep)
        - 2.0 * _quad_form(s2, e2, ep)
    )


def sigma_D2(d1: StepDistribution, d2: StepDistribution, g: DriftGeometry) -> float:
    """Limiting value of Var[diameter]/n, dispatched on the longest side
    of the drift triangle (walk 1, walk 2, or the difference walk)."""
    if not g.a1_holds:
        raise AssumptionViolation("diameter variance rate requires the drift assumptions")
    if g.a2_max is None:
        raise AssumptionViolation(
            "diameter variance rate is undefined without a unique longest side"
        )
    if g.a2_max == "mu1":
        return _quad_form(d1.covariance, g.e1, g.e1)
    if g.a2_max == "mu2":
        return _quad_form(d2.covariance, g.e2, g.e2)
    diff = Point2(g.mu1.x - g.mu2.x, g.mu1.y - g.mu2.y)
    ed = _unit(_polar_angle(diff))
    return _quad_form(d1.covariance + d2.covariance, ed, ed)


def _require_two_walks(ens: Ensemble) -> None:
    if ens.m != 2:
        raise ValueError("approximation sums are defined for two-walk ensembles")


def approx_sum_perimeter(ens: Ensemble, g: DriftGeometry) -> float:
    """Linear approximation sum for the centered perimeter: each step of
    walk 1 is centered and projected on (e_perp + e1), each step of walk 2
    on (e2 - e_perp), and everything is summed over time."""
    _require_two_walks(ens)
    if not g.a1_holds:
        raise AssumptionViolation("perimeter approximation sum requires the drift assumptions")
    e1, e2, ep = g.e1, g.e2, g.e_theta0_perp
    w1 = np.array([ep.x + e1.x, ep.y + e1.y])
    w2 = np.array([e2.x - ep.x, e2.y - ep.y])
    c1 = ens.walks[0].increments - np.array(g.mu1)
    c2 = ens.walks[1].increments - np.array(g.mu2)
    return float((c1 @ w1).sum() + (c2 @ w2).sum())


def approx_sum_diameter(ens: Ensemble, g: DriftGeometry) -> float:
    """Linear approximation sum for the centered diameter: the centered
    endpoint of the dominant walk (or of the difference of both walks)
    projected on the dominant direction."""
    _require_two_walks(ens)
    if not g.a1_holds:
        raise AssumptionViolation("diameter approximation sum requires the drift assumptions")
    if g.a2_max is None:
        raise AssumptionViolation(
            "diameter approximation sum is undefined without a unique longest side"
        )
    n = ens.n
    end1 = ens.walks[0].partial_sums[n] - n * np.array(g.mu1)
    end2 = ens.walks[1].partial_sums[n] - n * np.array(g.mu2)
    if g.a2_max == "mu1":
        return float(end1 @ np.array(g.e1))
    if g.a2_max == "mu2":
        return float(end2 @ np.array(g.e2))
    diff = Point2(g.mu1.x - g.mu2.x, g.mu1.y - g.mu2.y)
    ed = _unit(_polar_angle(diff))
    return float((end1 - end2) @ np.array(ed))
