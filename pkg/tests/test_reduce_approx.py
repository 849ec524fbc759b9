import numpy as np
import pytest

from splinemat import (
    BezierSegment,
    CubicApproxSegment,
    DepthExceeded,
    DomainError,
    approximate_error_controlled,
    decompose_to_bezier,
    elevate_degree,
    eval_bezier,
    measure_l1_error,
    reduce_to_cubic_g1,
    subdivide_and_modify,
)
from splinemat._fixtures import random_clamped_curve, table_shaped_curve
from oracle_helpers import (
    delta_search_box,
    dense_max_error,
    grid_refine_min,
    l2_objective,
)


def random_segment(rng, degree, dim=2):
    return BezierSegment(degree, rng.uniform(0, 1, (degree + 1, dim)), (0.0, 1.0))


class TestElevateDegree:
    def test_quadratic_example(self):
        seg = BezierSegment(2, [[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]], (0, 1))
        out = elevate_degree(seg, 3)
        assert np.allclose(out.control_points,
                           [[0, 0], [2 / 3, 2 / 3], [4 / 3, 2 / 3], [2, 0]])

    def test_straight_quadratic_stays_collinear(self):
        seg = BezierSegment(2, [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], (0, 1))
        out = elevate_degree(seg, 3)
        pts = out.control_points
        assert np.allclose(pts[:, 0], pts[:, 1])

    def test_point_set_unchanged(self):
        rng = np.random.default_rng(0)
        seg = random_segment(rng, 3, 3)
        out = elevate_degree(seg, 6)
        us = np.linspace(0, 1, 64)
        assert np.abs(out.evaluate(us) - seg.evaluate(us)).max() <= 1e-12

    def test_endpoints_fixed(self):
        rng = np.random.default_rng(1)
        seg = random_segment(rng, 2)
        out = elevate_degree(seg, 5)
        assert np.allclose(out.evaluate(0.0), seg.control_points[0], atol=1e-15)
        assert np.allclose(out.evaluate(1.0), seg.control_points[-1], atol=1e-15)

    def test_lowering_rejected(self):
        rng = np.random.default_rng(2)
        with pytest.raises(DomainError):
            elevate_degree(random_segment(rng, 4), 3)


class TestReduceToCubicG1:
    def test_elevated_cubic_roundtrip(self):
        rng = np.random.default_rng(3)
        cubic = random_segment(rng, 3, 3)
        lifted = elevate_degree(cubic, 4)
        sol = reduce_to_cubic_g1(lifted)
        assert sol.l2_error <= 1e-10
        assert np.abs(sol.cubic - cubic.control_points).max() <= 1e-9

    def test_collinear_segment_stays_on_line(self):
        ts = np.array([0.0, 0.15, 0.4, 0.75, 0.9, 1.0])
        direction = np.array([2.0, 1.0])
        seg = BezierSegment(5, np.outer(ts, direction), (0, 1))
        sol = reduce_to_cubic_g1(seg)
        # cross products with the line direction vanish
        cross = sol.cubic[:, 0] * direction[1] - sol.cubic[:, 1] * direction[0]
        assert np.abs(cross).max() <= 1e-12

    @pytest.mark.parametrize("degree", [4, 5, 6])
    def test_matches_grid_refinement_minimizer(self, degree):
        rng = np.random.default_rng(40 + degree)
        for _ in range(5):
            Q = rng.uniform(0, 1, (degree + 1, 3))
            sol = reduce_to_cubic_g1(BezierSegment(degree, Q, (0, 1)))
            f = l2_objective(Q)
            g0, g1 = grid_refine_min(f, box=delta_search_box(Q))
            assert abs(sol.delta0 - g0) <= 1e-6
            assert abs(sol.delta1 - g1) <= 1e-6

    def test_local_minimum_property(self):
        rng = np.random.default_rng(9)
        Q = rng.uniform(0, 1, (6, 2))
        sol = reduce_to_cubic_g1(BezierSegment(5, Q, (0, 1)))
        f = l2_objective(Q)
        base = f(sol.delta0, sol.delta1)
        for dx, dy in [(1e-4, 0), (-1e-4, 0), (0, 1e-4), (0, -1e-4)]:
            assert f(sol.delta0 + dx, sol.delta1 + dy) >= base - 1e-15

    def test_gram_error_equals_quadrature(self):
        rng = np.random.default_rng(10)
        Q = rng.uniform(0, 1, (7, 3))
        sol = reduce_to_cubic_g1(BezierSegment(6, Q, (0, 1)))
        f = l2_objective(Q)
        assert sol.l2_error == pytest.approx(f(sol.delta0, sol.delta1), abs=1e-13)

    def test_degenerate_tangent_falls_back(self):
        rng = np.random.default_rng(11)
        Q = rng.uniform(0, 1, (5, 2))
        Q[1] = Q[0]  # zero start tangent
        sol = reduce_to_cubic_g1(BezierSegment(4, Q, (0, 1)))
        assert sol.delta0 == 1.0 and sol.delta1 == 1.0

    def test_low_degree_rejected(self):
        rng = np.random.default_rng(12)
        with pytest.raises(DomainError):
            reduce_to_cubic_g1(random_segment(rng, 3))


class TestMeasureL1Error:
    def test_passthrough_zero(self):
        rng = np.random.default_rng(13)
        seg = random_segment(rng, 3)
        approx = CubicApproxSegment(seg.control_points, seg.source_interval, 0.0)
        mx, args = measure_l1_error(approx, seg)
        assert mx == 0.0
        assert len(args) > 0

    def test_constant_offset(self):
        rng = np.random.default_rng(14)
        seg = random_segment(rng, 3)
        shifted = np.array(seg.control_points)
        shifted[:, 0] += 0.25
        approx = CubicApproxSegment(shifted, seg.source_interval, np.inf)
        mx, args = measure_l1_error(approx, seg)
        assert mx == pytest.approx(0.25, abs=1e-13)
        # a constant offset peaks everywhere: every sample is an argmax
        assert len(args) == 64

    def test_matches_dense_scan(self):
        rng = np.random.default_rng(15)
        seg = random_segment(rng, 4, 3)
        sol = reduce_to_cubic_g1(seg)
        approx = CubicApproxSegment(sol.cubic, seg.source_interval, np.inf)
        mx, _ = measure_l1_error(approx, seg, samples=1024)
        dense = dense_max_error(sol.cubic, seg.source_interval,
                                seg.control_points, seg.source_interval)
        assert abs(mx - dense) <= 2e-5 * max(dense, 1e-9) + 1e-9

    def test_interval_containment_checked(self):
        rng = np.random.default_rng(16)
        seg = BezierSegment(3, rng.uniform(0, 1, (4, 2)), (0.2, 0.6))
        approx = CubicApproxSegment(seg.control_points, (0.1, 0.5), 0.0)
        with pytest.raises(DomainError):
            measure_l1_error(approx, seg)


class TestSubdivideAndModify:
    def test_exact_approx_children_rejoin(self):
        rng = np.random.default_rng(17)
        seg = random_segment(rng, 3)
        approx = CubicApproxSegment(seg.control_points, seg.source_interval, 0.0)
        left, right = subdivide_and_modify(approx, seg, 0.4)
        assert np.array_equal(left.control_points[3], right.control_points[0])
        assert np.allclose(left.control_points[3], eval_bezier(seg.control_points, 0.4),
                           atol=1e-14)
        for u in np.linspace(0, 1, 9):
            assert np.allclose(eval_bezier(left.control_points, u),
                               eval_bezier(seg.control_points, 0.4 * u), atol=1e-13)

    def test_straight_halves(self):
        seg = BezierSegment(3, [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]], (0, 1))
        approx = CubicApproxSegment(seg.control_points, (0.0, 1.0), 0.0)
        left, right = subdivide_and_modify(approx, seg, 0.5)
        assert left.source_interval == (0.0, 0.5)
        assert right.source_interval == (0.5, 1.0)
        assert np.allclose(left.control_points[3], [1.5, 0.0])

    def test_children_error_decreases(self):
        rng = np.random.default_rng(18)
        for _ in range(10):
            seg = random_segment(rng, 4, 2)
            sol = reduce_to_cubic_g1(seg)
            approx = CubicApproxSegment(sol.cubic, seg.source_interval, np.inf)
            mx, args = measure_l1_error(approx, seg)
            if mx == 0.0:
                continue
            z = float(args[0])
            if not 0.01 < z < 0.99:
                z = 0.5
            left, right = subdivide_and_modify(approx, seg, z)
            child_mx = max(measure_l1_error(left, seg)[0],
                           measure_l1_error(right, seg)[0])
            assert child_mx < mx


class TestApproximateErrorControlled:
    def test_cubic_passthrough_exact(self):
        rng = np.random.default_rng(19)
        curve = random_clamped_curve(rng, 3, 8, 2)
        segs = decompose_to_bezier(curve)
        out = approximate_error_controlled(segs, 1e-4)
        assert len(out) == len(segs)
        for cub, seg in zip(out, segs):
            assert np.array_equal(cub.control_points, seg.control_points)
            assert cub.measured_error == 0.0

    def test_quadratic_elevated_once(self):
        rng = np.random.default_rng(20)
        curve = random_clamped_curve(rng, 2, 6, 2)
        segs = decompose_to_bezier(curve)
        out = approximate_error_controlled(segs, 1e-4)
        assert len(out) == len(segs)
        for cub, seg in zip(out, segs):
            us = np.linspace(0, 1, 33)
            assert np.abs(eval_bezier(cub.control_points, us)
                          - seg.evaluate(us)).max() <= 1e-13

    @pytest.mark.parametrize("degree,klen", [(4, 14), (5, 18), (6, 22)])
    def test_tolerance_met_at_1024_samples(self, degree, klen):
        rng = np.random.default_rng(100 + degree)
        curve = table_shaped_curve(rng, degree, klen, 3)
        segs = decompose_to_bezier(curve)
        out = approximate_error_controlled(segs, 1e-4)
        for cub in out:
            assert cub.measured_error <= 1e-4
            seg = next(s for s in segs
                       if s.source_interval[0] <= cub.source_interval[0]
                       < s.source_interval[1])
            mx, _ = measure_l1_error(cub, seg, samples=1024)
            assert mx <= 1e-4

    def test_infinite_tolerance_one_cubic_per_segment(self):
        rng = np.random.default_rng(21)
        curve = random_clamped_curve(rng, 5, 12, 2)
        segs = decompose_to_bezier(curve)
        out = approximate_error_controlled(segs, np.inf)
        assert len(out) == len(segs)

    def test_interval_tiling_exact(self):
        rng = np.random.default_rng(22)
        curve = table_shaped_curve(rng, 5, 18, 3)
        segs = decompose_to_bezier(curve)
        out = approximate_error_controlled(segs, 1e-4)
        for a, b in zip(out, out[1:]):
            assert a.source_interval[1] == b.source_interval[0]
        assert out[0].source_interval[0] == segs[0].source_interval[0]
        assert out[-1].source_interval[1] == segs[-1].source_interval[1]

    def test_g1_at_seams(self):
        rng = np.random.default_rng(23)
        curve = table_shaped_curve(rng, 5, 18, 2)
        segs = decompose_to_bezier(curve)
        out = approximate_error_controlled(segs, 1e-4)
        for a, b in zip(out, out[1:]):
            tan_out = a.control_points[3] - a.control_points[2]
            tan_in = b.control_points[1] - b.control_points[0]
            na, nb = np.linalg.norm(tan_out), np.linalg.norm(tan_in)
            if na < 1e-12 or nb < 1e-12:
                continue
            cross = tan_out[0] * tan_in[1] - tan_out[1] * tan_in[0]
            assert abs(cross) / (na * nb) <= 1e-9

    def test_prefix_sum_and_compaction_invariants(self):
        rng = np.random.default_rng(24)
        curve = table_shaped_curve(rng, 6, 22, 3)
        segs = decompose_to_bezier(curve)
        out, levels = approximate_error_controlled(segs, 1e-4, collect_levels=True)
        assert levels, "expected at least one subdivision pass"
        for lv in levels:
            ps = lv.child_prefix_sum
            assert np.all(np.diff(ps) >= 0)
            assert len(ps) == len(lv.compaction_keys) + 1
            # every compaction key indexes a segment of this level
            assert np.all(lv.compaction_keys >= 0)
            assert np.all(lv.compaction_keys < len(lv.segments))
            # failing segments truly failed, passing ones truly passed
            failing = set(lv.compaction_keys.tolist())
            # children per failing segment occupy [ps[j], ps[j+1])
            widths = np.diff(ps)
            assert np.all(widths >= 2)

    def test_batch_cap_does_not_change_output(self):
        rng = np.random.default_rng(25)
        curve = table_shaped_curve(rng, 4, 14, 2)
        segs = decompose_to_bezier(curve)
        a = approximate_error_controlled(segs, 1e-4, batch_cap=4096)
        b = approximate_error_controlled(segs, 1e-4, batch_cap=1)
        assert len(a) == len(b)
        for ca, cb in zip(a, b):
            assert np.array_equal(ca.control_points, cb.control_points)

    def test_depth_cap_reports_interval(self):
        rng = np.random.default_rng(26)
        curve = table_shaped_curve(rng, 5, 12, 2)
        segs = decompose_to_bezier(curve)
        with pytest.raises(DepthExceeded):
            approximate_error_controlled(segs, 1e-13, max_depth=1)

    def test_rejects_bad_tolerance(self):
        with pytest.raises(DomainError):
            approximate_error_controlled([], 0.0)
