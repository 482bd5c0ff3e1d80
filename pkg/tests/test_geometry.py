import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from walkhull.geometry import (
    AngleGrid,
    ConvexPolygon,
    Point2,
    area,
    cauchy_diameter,
    cauchy_perimeter,
    convex_hull,
    diameter,
    distance_to_polygon,
    hausdorff,
    perimeter,
    range_fn,
    support,
)
from conftest import brute_force_diameter, cloud_hull, dense_hausdorff, ellipse_hull

SQRT2 = math.sqrt(2.0)


def square(shift=(0.0, 0.0)):
    sx, sy = shift
    return convex_hull([Point2(sx, sy), Point2(sx + 1, sy), Point2(sx + 1, sy + 1), Point2(sx, sy + 1)])


class TestConvexHull:
    def test_triangle_already_extreme(self):
        h = convex_hull([Point2(0, 0), Point2(1, 0), Point2(0, 1)])
        assert h.vertices == (Point2(0, 0), Point2(1, 0), Point2(0, 1))

    def test_interior_point_removed(self):
        h = convex_hull([Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1), Point2(0.5, 0.5)])
        assert len(h) == 4
        assert Point2(0.5, 0.5) not in h.vertices

    def test_collinear_collapses_to_segment(self):
        h = convex_hull([Point2(0, 0), Point2(1, 0), Point2(2, 0)])
        assert h.vertices == (Point2(0, 0), Point2(2, 0))

    def test_coincident_points_collapse(self):
        h = convex_hull([Point2(3, 4)] * 5)
        assert h.vertices == (Point2(3, 4),)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            convex_hull(np.empty((0, 2)))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            convex_hull([Point2(0, 0), Point2(math.nan, 1)])

    def test_accepts_ndarray(self):
        h = convex_hull(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]))
        assert len(h) == 3

    def test_pruned_path_matches_unpruned(self):
        rng = np.random.default_rng(42)
        import walkhull.geometry as geo

        for _ in range(10):
            pts = rng.normal(size=(3000, 2)).cumsum(axis=0)
            pruned = convex_hull(pts)
            saved = geo._PRUNE_THRESHOLD
            geo._PRUNE_THRESHOLD = 10**9
            try:
                full = convex_hull(pts)
            finally:
                geo._PRUNE_THRESHOLD = saved
            assert pruned.vertices == full.vertices


class TestPolygonValidation:
    def test_needs_a_vertex(self):
        with pytest.raises(ValueError):
            ConvexPolygon(())

    def test_rejects_coincident_segment(self):
        with pytest.raises(ValueError):
            ConvexPolygon((Point2(1, 1), Point2(1, 1)))

    def test_rejects_clockwise_order(self):
        with pytest.raises(ValueError):
            ConvexPolygon((Point2(0, 0), Point2(0, 1), Point2(1, 0)))

    def test_rejects_collinear_triple(self):
        with pytest.raises(ValueError):
            ConvexPolygon((Point2(0, 0), Point2(1, 0), Point2(2, 0)))


class TestPerimeter:
    def test_unit_square(self):
        assert perimeter(square()) == 4.0

    def test_segment_counts_both_sides(self):
        # independent quadrature oracle: range of the segment at angle t is
        # |cos t|, and the integral of |cos| over [0, pi] is exactly 2
        t = np.linspace(0.0, math.pi, 20001)
        oracle = np.trapezoid(np.abs(np.cos(t)), t)
        assert abs(oracle - 2.0) < 1e-8
        seg = convex_hull([Point2(0, 0), Point2(1, 0)])
        assert perimeter(seg) == 2.0

    def test_right_triangle(self):
        h = convex_hull([Point2(0, 0), Point2(1, 0), Point2(0, 1)])
        assert perimeter(h) == pytest.approx(2.0 + SQRT2, rel=1e-15)

    def test_point_is_zero(self):
        assert perimeter(convex_hull([Point2(5, 5)])) == 0.0


class TestDiameter:
    def test_unit_square(self):
        assert diameter(square()) == pytest.approx(SQRT2, rel=1e-15)

    def test_single_point(self):
        assert diameter(convex_hull([Point2(1, 2)])) == 0.0

    def test_matches_brute_force_on_random_hulls(self):
        rng = np.random.default_rng(7)
        for trial in range(60):
            h = ellipse_hull(rng) if trial % 2 == 0 else cloud_hull(rng)
            d = diameter(h)
            bf = brute_force_diameter(h)
            assert abs(d - bf) <= 1e-12 * bf


class TestArea:
    def test_unit_square(self):
        assert area(square()) == 1.0

    def test_segment_zero(self):
        assert area(convex_hull([Point2(0, 0), Point2(1, 0)])) == 0.0

    def test_triangle(self):
        h = convex_hull([Point2(0, 0), Point2(2, 0), Point2(0, 2)])
        assert area(h) == 2.0


class TestSupport:
    def test_square_theta0(self):
        assert support(square(), 0.0) == (1.0, 0.0)

    def test_square_diagonal(self):
        big, small = support(square(), math.pi / 4)
        assert big == pytest.approx(SQRT2, rel=1e-15)
        assert small == 0.0

    def test_origin_inside_pins_signs(self):
        # polygons containing the origin: max projection >= 0 >= min projection
        rng = np.random.default_rng(11)
        for _ in range(25):
            pts = np.vstack([rng.normal(size=(15, 2)), [[0.0, 0.0]]])
            h = convex_hull(pts)
            for theta in rng.uniform(0, 2 * math.pi, size=8):
                big, small = support(h, theta)
                assert big >= -1e-12
                assert small <= 1e-12

    def test_range_fn(self):
        assert range_fn(square(), 0.0) == 1.0
        seg = convex_hull([Point2(0, 0), Point2(1, 0)])
        assert range_fn(seg, math.pi / 2) == pytest.approx(0.0, abs=1e-15)
        assert range_fn(square(), math.pi / 4) == pytest.approx(SQRT2, rel=1e-15)

    def test_rejects_non_finite_angle(self):
        with pytest.raises(ValueError):
            support(square(), math.inf)


class TestCauchyPerimeter:
    def test_square_fine_grid(self):
        assert cauchy_perimeter(square(), AngleGrid(2**14)) == pytest.approx(4.0, abs=1e-6)

    def test_unit_segment_kinked_integrand(self):
        seg = convex_hull([Point2(0, 0), Point2(1, 0)])
        assert cauchy_perimeter(seg, AngleGrid(2**14)) == pytest.approx(2.0, abs=1e-4)

    def test_matches_edge_sum_on_random_hulls(self):
        rng = np.random.default_rng(5)
        grid = AngleGrid(2**14)
        for trial in range(20):
            h = ellipse_hull(rng) if trial % 2 == 0 else cloud_hull(rng)
            p = perimeter(h)
            assert abs(cauchy_perimeter(h, grid) - p) <= 1e-6 * p

    def test_odd_panel_count_still_converges(self):
        h = square()
        assert cauchy_perimeter(h, AngleGrid(4097)) == pytest.approx(4.0, abs=1e-5)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            AngleGrid(1)


class TestCauchyDiameter:
    def test_square_grid_hits_optimum(self):
        assert cauchy_diameter(square(), AngleGrid(4)) == pytest.approx(SQRT2, rel=1e-12)

    def test_aligned_segment(self):
        seg = convex_hull([Point2(0, 0), Point2(1, 0)])
        assert cauchy_diameter(seg, AngleGrid(8)) == pytest.approx(1.0, rel=1e-15)

    def test_lower_bound_converging_to_calipers(self):
        rng = np.random.default_rng(17)
        grid = AngleGrid(2**16)
        for trial in range(12):
            h = ellipse_hull(rng) if trial % 2 == 0 else cloud_hull(rng)
            d = diameter(h)
            cd = cauchy_diameter(h, grid)
            assert cd <= d * (1 + 1e-12)
            assert abs(cd - d) <= 1e-6 * d


class TestHausdorff:
    def test_identical_polygons(self):
        assert hausdorff(square(), square()) == 0.0

    def test_translated_square(self):
        assert hausdorff(square(), square(shift=(3.0, 0.0))) == pytest.approx(3.0, rel=1e-12)

    def test_point_vs_segment(self):
        pt = convex_hull([Point2(0, 0)])
        seg = convex_hull([Point2(0, 0), Point2(1, 0)])
        assert hausdorff(pt, seg) == 1.0

    def test_agrees_with_dense_sampling_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(8):
            a = cloud_hull(rng, n=25)
            b = cloud_hull(rng, n=25)
            exact = hausdorff(a, b)
            approx = dense_hausdorff(a, b)
            assert abs(exact - approx) < 0.05

    def test_metric_axioms_on_random_triples(self):
        rng = np.random.default_rng(29)
        for _ in range(30):
            a = cloud_hull(rng, n=12)
            b = cloud_hull(rng, n=12)
            c = cloud_hull(rng, n=12)
            assert hausdorff(a, b) == hausdorff(b, a)
            assert hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-9

    def test_distance_to_polygon_inside_and_out(self):
        sq = square()
        assert distance_to_polygon(Point2(0.5, 0.5), sq) == 0.0
        assert distance_to_polygon(Point2(2.0, 0.5), sq) == 1.0
        assert distance_to_polygon(Point2(2.0, 2.0), sq) == pytest.approx(SQRT2, rel=1e-15)


coords = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
point_lists = st.lists(st.tuples(coords, coords), min_size=1, max_size=40)


class TestHullProperties:
    @given(point_lists)
    @settings(deadline=None)
    def test_idempotent(self, pts):
        h1 = convex_hull(np.array(pts))
        h2 = convex_hull(h1.coords)
        assert set(h1.vertices) == set(h2.vertices)

    @given(point_lists)
    @settings(deadline=None)
    def test_contains_every_input_point(self, pts):
        arr = np.array(pts)
        h = convex_hull(arr)
        scale = max(1.0, float(np.abs(arr).max()))
        for x, y in pts:
            assert distance_to_polygon(Point2(x, y), h) <= 1e-9 * scale

    @given(point_lists, st.tuples(coords, coords))
    @settings(deadline=None)
    def test_monotone_under_point_insertion(self, pts, extra):
        h1 = convex_hull(np.array(pts))
        h2 = convex_hull(np.array(pts + [extra]))
        slack = 1e-9 * max(1.0, perimeter(h2), diameter(h2))
        assert perimeter(h2) >= perimeter(h1) - slack
        assert diameter(h2) >= diameter(h1) - slack
        assert area(h2) >= area(h1) - slack

    @given(point_lists)
    @settings(deadline=None)
    def test_diameter_equals_brute_force(self, pts):
        h = convex_hull(np.array(pts))
        bf = brute_force_diameter(h)
        assert abs(diameter(h) - bf) <= 1e-12 * max(1.0, bf)

    @given(point_lists, st.floats(min_value=0.01, max_value=100.0))
    @settings(deadline=None)
    def test_scaling_homogeneity(self, pts, c):
        arr = np.array(pts)
        h1 = convex_hull(arr)
        h2 = convex_hull(c * arr)
        assert abs(perimeter(h2) - c * perimeter(h1)) <= 1e-12 * max(1.0, c * perimeter(h1))
        assert abs(diameter(h2) - c * diameter(h1)) <= 1e-12 * max(1.0, c * diameter(h1))

    @given(
        point_lists,
        st.floats(min_value=0.0, max_value=2 * math.pi),
        st.tuples(coords, coords),
    )
    @settings(deadline=None)
    def test_rigid_motion_invariance(self, pts, phi, shift):
        arr = np.array(pts)
        rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        moved = arr @ rot.T + np.array(shift)
        h1 = convex_hull(arr)
        h2 = convex_hull(moved)
        scale = max(1.0, perimeter(h1), diameter(h1))
        assert abs(perimeter(h2) - perimeter(h1)) <= 1e-9 * scale
        assert abs(diameter(h2) - diameter(h1)) <= 1e-9 * scale
        assert abs(area(h2) - area(h1)) <= 1e-9 * scale * scale

    @given(st.floats(min_value=0.0, max_value=math.pi), st.floats(min_value=0.0, max_value=2 * math.pi))
    @settings(deadline=None)
    def test_support_rotation_identity(self, theta, phi):
        rng = np.random.default_rng(123)
        arr = rng.normal(size=(15, 2))
        rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        h = convex_hull(arr)
        hr = convex_hull(arr @ rot.T)
        big_r, _ = support(hr, theta)
        big, _ = support(h, theta - phi)
        assert big_r == pytest.approx(big, abs=1e-9 * max(1.0, abs(big)))

    def test_hausdorff_rigid_motion_invariance(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            a = rng.normal(size=(10, 2))
            b = rng.normal(size=(10, 2))
            phi = rng.uniform(0, 2 * math.pi)
            shift = rng.normal(size=2)
            rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
            d1 = hausdorff(convex_hull(a), convex_hull(b))
            d2 = hausdorff(convex_hull(a @ rot.T + shift), convex_hull(b @ rot.T + shift))
            assert abs(d1 - d2) <= 1e-9 * max(1.0, d1)
