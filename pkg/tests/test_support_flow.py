import numpy as np
import pytest
from numpy.testing import assert_allclose

from models.errors import EmptySublevel, NonConvexCurve
from models.flow_types import SupportCurve
from services.support_flow_service import (
    approximating_graph, double_and_envelope, lower_half, mean_radius, mollify_support,
    run_support_flow, support_cfl_dt, support_of_points, support_to_points,
)


def circle(m: int = 64, radius: float = 1.0, beta: float = 1.0) -> SupportCurve:
    return SupportCurve(np.full(m, radius), beta=beta)


class TestSupportCurve:

    def test_too_few_nodes(self):
        with pytest.raises(ValueError):
            SupportCurve(np.ones(8))

    def test_circle_curvature(self):
        assert_allclose(circle(radius=2.0).curvature(), 0.5, rtol=1e-12)

    def test_points_of_circle(self):
        points = support_to_points(circle(radius=1.5))
        assert_allclose(np.linalg.norm(points, axis=-1), 1.5, rtol=1e-12)

    def test_support_of_square(self):
        square = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
        S = support_of_points(square, 16, (0.0, 0.0))
        assert S[0] == pytest.approx(1.0)
        assert S[2] == pytest.approx(np.sqrt(2.0))
        assert S[4] == pytest.approx(1.0)

    def test_cfl_step(self):
        curve = circle(m=64, radius=0.5, beta=2.0)
        expected = 0.5 * curve.dtheta ** 2 / (2.0 * 2.0 * 2.0 ** 3)
        assert support_cfl_dt(curve, safety=0.5) == pytest.approx(expected)


class TestSupportFlow:

    @pytest.mark.parametrize("beta", [1.0, 2.0])
    def test_circle_shrinks_like_sphere(self, beta):
        traj = run_support_flow(circle(beta=beta), t_end=0.1)
        final = traj.curves[-1]
        assert final.t == pytest.approx(0.1)
        assert np.ptp(final.S) < 1e-12
        assert_allclose(final.S, (1.0 - (beta + 1.0) * 0.1) ** (1.0 / (beta + 1.0)), rtol=1e-4)
        assert traj.collapse_time is None

    @pytest.mark.parametrize("beta", [1.0, 2.0])
    def test_collapse_time(self, beta):
        traj = run_support_flow(circle(beta=beta))
        assert traj.collapse_time == pytest.approx(1.0 / (beta + 1.0), rel=1e-2)
        assert mean_radius(traj.curves[-1]) < 1e-2

    def test_nonconvex_curve_rejected(self):
        theta = 2.0 * np.pi * np.arange(64) / 64
        with pytest.raises(NonConvexCurve):
            run_support_flow(SupportCurve(1.0 + 0.5 * np.cos(3.0 * theta)), t_end=0.1)

    def test_snapshot_times_increase(self):
        traj = run_support_flow(circle(), t_end=0.2, snapshot_every=50)
        times = [c.t for c in traj.curves]
        assert all(b > a for a, b in zip(times, times[1:]))
        assert len(traj.curves) > 2

    def test_elongated_curve_rounds(self):
        theta = 2.0 * np.pi * np.arange(128) / 128
        traj = run_support_flow(SupportCurve(1.0 + 0.1 * np.cos(2.0 * theta)), t_end=0.2, snapshot_every=50)
        spread = [np.ptp(c.S) for c in traj.curves]
        assert len(spread) > 3
        assert np.all(np.diff(spread) <= 0.0)
        # linearized decay of the cos 2theta mode is (1 - 2t)^(3/2) ~ 0.46 at t = 0.2
        assert spread[-1] < 0.6 * spread[0]

    @pytest.mark.parametrize("beta", [1.0, 2.0])
    def test_translation_is_preserved(self, beta):
        theta = 2.0 * np.pi * np.arange(128) / 128
        base = 1.0 + 0.1 * np.cos(2.0 * theta)
        shift = 0.05 * np.cos(theta) - 0.03 * np.sin(theta)
        plain = run_support_flow(SupportCurve(base, beta=beta), t_end=0.1).curves[-1]
        moved = run_support_flow(SupportCurve(base + shift, beta=beta), t_end=0.1).curves[-1]
        assert moved.t == pytest.approx(plain.t)
        assert_allclose(moved.S - plain.S, shift, atol=1e-5)


class TestDoubling:

    @pytest.fixture
    def parabola(self):
        x = np.linspace(-1.5, 1.5, 3001)
        return x, x ** 2

    def test_envelope_of_doubled_parabola(self, parabola):
        x, w = parabola
        curve = double_and_envelope(x, w, 1.0, 0.1, 128)
        assert curve.origin == pytest.approx((0.0, 1.0))
        assert curve.S[32] == pytest.approx(1.1, abs=1e-9)
        assert curve.S[0] == pytest.approx(1.1, abs=1e-6)

    def test_reflection_symmetry(self, parabola):
        x, w = parabola
        S = double_and_envelope(x, w, 1.0, 0.05, 64).S
        assert np.array_equal(S, S[(-np.arange(64)) % 64])

    def test_lower_half_lies_below_level(self, parabola):
        x, w = parabola
        points = lower_half(double_and_envelope(x, w, 1.0, 0.05, 128))
        assert np.all(points[:, 1] < 1.0)
        assert np.all(np.diff(points[:, 0]) >= 0)
        assert np.min(points[:, 1]) == pytest.approx(-0.05, abs=1e-3)

    def test_empty_sublevel(self, parabola):
        x, w = parabola
        with pytest.raises(EmptySublevel):
            double_and_envelope(x, w + 2.0, 1.0, 0.1, 64)

    def test_eps_must_be_positive(self, parabola):
        x, w = parabola
        with pytest.raises(ValueError):
            double_and_envelope(x, w, 1.0, 0.0, 64)

    def test_approximating_graph(self, parabola):
        x, w = parabola
        curve = approximating_graph(x, w, 4, 64)
        assert curve.origin[1] == pytest.approx(4.0)
        with pytest.raises(ValueError):
            approximating_graph(x, w, 0, 64)


class TestMollifier:

    def test_circle_unchanged(self):
        assert_allclose(mollify_support(circle(), 0.3).S, 1.0, rtol=1e-12)

    def test_smooths_but_keeps_convexity(self):
        theta = 2.0 * np.pi * np.arange(128) / 128
        curve = SupportCurve(1.0 + 0.05 * np.cos(4.0 * theta))
        smooth = mollify_support(curve, 0.3)
        assert np.ptp(smooth.S) < np.ptp(curve.S)
        assert np.min(smooth.radius_of_curvature()) > 0

    def test_width_must_be_positive(self):
        with pytest.raises(ValueError):
            mollify_support(circle(), 0.0)
