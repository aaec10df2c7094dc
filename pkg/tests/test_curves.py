import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from lsmgraph import (
    QuadraticBezier,
    TubeConfig,
    arclength_reparameterize,
    default_tube,
    fit_quadratic_bezier,
    hardy_weinberg,
    minimal_subspace_dimension,
)
from lsmgraph.curves import CurveError, ParametricCurve

from conftest import philox

# Independent high-order quadrature oracle for the H-W arclength
# (scipy Gauss-Kronrod, not the adaptive Simpson used by the library).
HW_LENGTH_ORACLE = quad(
    lambda t: np.sqrt((2 * t) ** 2 + (2 - 4 * t) ** 2 + (2 * (1 - t)) ** 2), 0.0, 1.0,
    epsabs=1e-13, epsrel=1e-13,
)[0]


def segment_curve(direction=(1.0, 0.0)):
    d = np.asarray(direction, dtype=float)
    return ParametricCurve(
        fun=lambda t: np.asarray(t, dtype=float)[:, None] * d,
        deriv=lambda t: np.broadcast_to(d, (np.size(t), d.size)).copy(),
        ambient_dim=d.size,
    )


class TestHardyWeinberg:
    def test_endpoints_and_midpoint(self):
        r = hardy_weinberg()
        np.testing.assert_allclose(r(np.array([0.0]))[0], [0.0, 0.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(r(np.array([0.5]))[0], [0.25, 0.5, 0.25], atol=1e-15)

    def test_inner_product_curve_endpoints(self):
        r = hardy_weinberg()
        p0 = r(np.array([0.0]))[0]
        p1 = r(np.array([1.0]))[0]
        assert p0 @ p1 == 0.0
        assert p0 @ p0 == 1.0

    def test_analytic_derivative_matches_finite_difference(self):
        r = hardy_weinberg()
        t = np.linspace(0.01, 0.99, 17)
        h = 1e-7
        fd = (r(t + h) - r(t - h)) / (2 * h)
        np.testing.assert_allclose(r.deriv(t), fd, atol=1e-6)


class TestArclength:
    def test_straight_segment_identity(self):
        ac = arclength_reparameterize(segment_curve())
        assert ac.total_length == pytest.approx(1.0, abs=1e-12)
        s = np.linspace(0, 1, 11)
        np.testing.assert_allclose(ac.point(s)[:, 0], s, atol=1e-10)

    def test_hw_length_matches_quadrature_oracle(self, hw_curve):
        assert hw_curve.total_length == pytest.approx(HW_LENGTH_ORACLE, abs=1e-10)

    def test_hw_reflection_symmetry(self, hw_curve):
        # r(1-t) swaps coordinates 1 and 3, so p(1-s) is p(s) reflected
        s = np.linspace(0, 1, 41)
        left = hw_curve.point(s)
        right = hw_curve.point(1.0 - s)[:, ::-1]
        np.testing.assert_allclose(left, right, atol=1e-9)

    def test_rejects_vanishing_speed(self):
        cusp = ParametricCurve(
            fun=lambda t: np.stack([(t - 0.5) ** 2, np.zeros_like(t)], axis=-1),
            deriv=lambda t: np.stack([2 * (t - 0.5), np.zeros_like(t)], axis=-1),
            ambient_dim=2,
        )
        with pytest.raises(CurveError, match="speed vanishes"):
            arclength_reparameterize(cusp)

    def test_unit_speed_invariant(self, hw_curve):
        h = 1e-5
        s = np.linspace(h, 1 - h, 101)
        speed = np.linalg.norm(hw_curve.point(s + h) - hw_curve.point(s), axis=1) / h
        np.testing.assert_allclose(speed / hw_curve.total_length, 1.0, atol=1e-4)


class TestCurvePoint:
    def test_endpoints(self, hw_curve):
        np.testing.assert_allclose(hw_curve.point(np.array([0.0]))[0], [0, 0, 1], atol=1e-12)
        np.testing.assert_allclose(hw_curve.point(np.array([1.0]))[0], [1, 0, 0], atol=1e-12)

    def test_rejects_out_of_domain(self, hw_curve):
        with pytest.raises(CurveError):
            hw_curve.point(np.array([-0.01]))
        with pytest.raises(CurveError):
            hw_curve.point(np.array([1.01]))

    def test_matches_bisection_oracle(self, hw_curve):
        # oracle: invert the cumulative length by bisection on an
        # independent quadrature of the speed
        speed = lambda t: float(np.sqrt((2*t)**2 + (2-4*t)**2 + (2*(1-t))**2))
        rng = philox(10)
        for s in rng.random(12):
            target = s * HW_LENGTH_ORACLE
            t_star = brentq(
                lambda t: quad(speed, 0.0, t, epsabs=1e-13)[0] - target, 0.0, 1.0,
                xtol=1e-12,
            )
            oracle_point = hardy_weinberg()(np.array([t_star]))[0]
            ours = hw_curve.point(np.array([s]))[0]
            assert np.linalg.norm(ours - oracle_point) < 1e-8


class TestPullbackAndProjection:
    def test_roundtrip_on_grid(self, hw_curve):
        s = np.linspace(0, 1, 201)
        back = hw_curve.pullback(hw_curve.point(s))
        np.testing.assert_allclose(back, s, atol=1e-8)

    def test_pullback_of_endpoint(self, hw_curve):
        assert hw_curve.pullback(np.array([0.0, 0.0, 1.0])) == pytest.approx(0.0, abs=1e-9)

    def test_pullback_rejects_far_points(self, hw_curve):
        with pytest.raises(CurveError, match="away from the curve"):
            hw_curve.pullback(np.array([2.0, 2.0, 2.0]), tol=1e-6)

    def test_project_point_already_on_curve(self, hw_curve):
        x = hw_curve.point(np.array([0.37]))[0]
        res = hw_curve.project(x)
        assert res.distance < 1e-9
        np.testing.assert_allclose(res.point, x, atol=1e-9)

    def test_project_beyond_endpoint(self, hw_curve):
        res = hw_curve.project(np.array([0.0, 0.0, 1.1]))
        assert res.s == pytest.approx(0.0, abs=1e-9)
        np.testing.assert_allclose(res.point, [0, 0, 1], atol=1e-8)
        assert res.distance == pytest.approx(0.1, abs=1e-8)

    def test_project_matches_dense_grid_oracle(self, hw_curve):
        # brute-force argmin over a dense arclength grid
        grid = np.linspace(0, 1, 200001)
        curve_pts = hw_curve.point(grid)
        rng = philox(11)
        s_true = rng.random(8)
        normals = rng.standard_normal((8, 3)) * 0.05
        points = hw_curve.point(s_true) + normals
        res = hw_curve.project(points)
        for x, s_found in zip(points, np.atleast_1d(res.s)):
            d = np.linalg.norm(curve_pts - x, axis=1)
            s_oracle = grid[int(np.argmin(d))]
            assert abs(s_found - s_oracle) < 1e-4

    def test_projection_idempotent(self, hw_curve):
        rng = philox(12)
        x = hw_curve.point(rng.random(6)) + 0.03 * rng.standard_normal((6, 3))
        first = hw_curve.project(x)
        second = hw_curve.project(first.point)
        assert np.max(np.linalg.norm(second.point - first.point, axis=1)) < 1e-10

    def test_tube_flag(self, hw_curve):
        tube = default_tube(hw_curve)
        near = hw_curve.point(np.array([0.5]))[0] * 1.01
        far = np.array([3.0, 3.0, 3.0])
        res = hw_curve.project(np.stack([near, far]), tube=tube)
        assert list(res.outside_tube) == [False, True]

    def test_pullback_lipschitz_in_tube(self, hw_curve):
        # smoothness probe: nearby tube points have nearby pullbacks
        rng = philox(13)
        base_s = rng.uniform(0.1, 0.9, 20)
        x = hw_curve.point(base_s) + 0.02 * rng.standard_normal((20, 3))
        delta = 1e-4 * rng.standard_normal((20, 3))
        s1 = np.atleast_1d(hw_curve.project(x).s)
        s2 = np.atleast_1d(hw_curve.project(x + delta).s)
        ratio = np.abs(s1 - s2) / np.linalg.norm(delta, axis=1)
        assert np.max(ratio) < 5.0


class TestReverseOrientation:
    def test_involution(self, hw_curve):
        twice = hw_curve.reverse().reverse()
        s = np.linspace(0, 1, 101)
        np.testing.assert_allclose(twice.point(s), hw_curve.point(s), atol=1e-12)

    def test_reversed_start(self, hw_curve):
        rev = hw_curve.reverse()
        np.testing.assert_allclose(rev.point(np.array([0.0]))[0], [1, 0, 0], atol=1e-12)

    def test_pullback_flips(self, hw_curve):
        rev = hw_curve.reverse()
        s = np.linspace(0.05, 0.95, 19)
        pts = hw_curve.point(s)
        np.testing.assert_allclose(rev.pullback(pts), 1.0 - s, atol=1e-8)


class TestMinimalSubspaceDimension:
    def test_hw_is_three(self):
        assert minimal_subspace_dimension(hardy_weinberg(), 512, 1e-8) == 3

    def test_segment_through_origin(self):
        line = segment_curve((1.0, 2.0, 3.0))
        assert minimal_subspace_dimension(line, 128, 1e-8) == 1

    def test_circle_oracle_cases(self):
        # SVD oracle: exact circle samples have known rank
        def circle(center, scale=0.1):
            c = np.asarray(center, dtype=float)

            def fun(t):
                t = np.asarray(t, dtype=float)
                ang = 2 * np.pi * t
                out = np.zeros((t.size, 3))
                out[:, 0] = scale * np.cos(ang)
                out[:, 1] = scale * np.sin(ang)
                return out + c

            def deriv(t):
                t = np.asarray(t, dtype=float)
                ang = 2 * np.pi * t
                out = np.zeros((t.size, 3))
                out[:, 0] = -2 * np.pi * scale * np.sin(ang)
                out[:, 1] = 2 * np.pi * scale * np.cos(ang)
                return out

            return ParametricCurve(fun, deriv, 3)

        off_origin = circle(center=(0.3, 0.3, 0.3))
        in_plane = circle(center=(0.0, 0.0, 0.0))
        assert minimal_subspace_dimension(off_origin, 256, 1e-8) == 3
        assert minimal_subspace_dimension(in_plane, 256, 1e-8) == 2

    def test_grid_size_validation(self):
        with pytest.raises(ValueError):
            minimal_subspace_dimension(hardy_weinberg(), grid_size=5)


HW_CONTROLS = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])


def brute_force_bezier_params(points, bezier, grid=20001):
    t = np.linspace(0, 1, grid)
    curve_pts = bezier(t)
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2 * points @ curve_pts.T
        + np.sum(curve_pts**2, axis=1)[None, :]
    )
    return t[np.argmin(d2, axis=1)]


class TestQuadraticBezierFit:
    def test_exact_hw_samples_recover_controls(self, hw_curve):
        points = hw_curve.point(np.linspace(0, 1, 300))
        fit = fit_quadratic_bezier(points)
        np.testing.assert_allclose(fit.curve.control_points, HW_CONTROLS, atol=1e-6)
        assert fit.residual < 1e-12

    def test_straight_segment(self):
        points = np.linspace(0, 1, 60)[:, None] * np.array([2.0, 1.0])
        fit = fit_quadratic_bezier(points)
        p0, p1, p2 = fit.curve.control_points
        # middle control lies on the segment, and the fit is exact
        cross = p1[0] * 1.0 - p1[1] * 2.0
        assert abs(cross) < 1e-8
        assert fit.residual < 1e-16

    def test_noisy_fit_beats_generating_controls(self):
        rng = philox(14)
        truth = QuadraticBezier(HW_CONTROLS)
        t = rng.random(500)
        noisy = truth(t) + 0.01 * rng.standard_normal((500, 3))
        fit = fit_quadratic_bezier(noisy)
        t_oracle = brute_force_bezier_params(noisy, truth)
        truth_residual = float(np.sum((truth(t_oracle) - noisy) ** 2))
        assert fit.residual <= truth_residual

    def test_degenerate_configuration_rejected(self):
        points = np.tile([0.5, 0.5], (10, 1))
        with pytest.raises(CurveError):
            fit_quadratic_bezier(points)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            fit_quadratic_bezier(np.array([[0.0, 0.0], [1.0, 1.0]]))

    def test_bezier_reversal_swaps_controls(self):
        bez = QuadraticBezier(HW_CONTROLS)
        rev = bez.reversed()
        np.testing.assert_allclose(rev(np.array([0.25])), bez(np.array([0.75])), atol=1e-15)


class TestTubeConfig:
    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            TubeConfig(0.2, 0.1, 0.3)
        with pytest.raises(ValueError):
            TubeConfig(0.0, 0.1, 0.2)

    def test_default_tube_sane(self, hw_curve):
        tube = default_tube(hw_curve)
        assert 0 < tube.r_inner < tube.r_outer < tube.r_max

    def test_projection_single_valued_in_default_tube(self, hw_curve):
        # probe: points inside the tube project to a unique nearest point
        tube = default_tube(hw_curve)
        rng = philox(15)
        s = rng.uniform(0.05, 0.95, 50)
        pts = hw_curve.point(s)
        tangent = hw_curve.point(np.minimum(s + 1e-4, 1.0)) - pts
        tangent /= np.linalg.norm(tangent, axis=1, keepdims=True)
        normal = rng.standard_normal((50, 3))
        normal -= (np.sum(normal * tangent, axis=1, keepdims=True)) * tangent
        normal /= np.linalg.norm(normal, axis=1, keepdims=True)
        probes = pts + 0.9 * tube.r_inner * normal
        res = hw_curve.project(probes)
        assert np.max(np.abs(np.atleast_1d(res.s) - s)) < 0.05
