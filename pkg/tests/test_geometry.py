import numpy as np
import pytest
from numpy.testing import assert_allclose

from models.errors import DomainError, NonConvexState, SingularInput
from models.graph_state import GraphGrid, GraphState
from services.flow_service import paraboloid_state, profile_state
from services.geometry_service import (
    differentiate, euler_bound_check, generalized_eigenvalues, geom_fields,
    inverse_second_fundamental_form, metric, rotational_curvature_arrays, rotational_curvatures,
    shape_operator_explicit, sphere_profile, validate_initial_graph,
)
from utils.parallel import map_rows, worker_count


def random_spd(rng, n, low=0.5, high=2.0):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return Q @ np.diag(rng.uniform(low, high, size=n)) @ Q.T


class TestGraphGrid:

    def test_box_one_dimensional(self):
        grid = GraphGrid.box(1, 0.25, 1.0)
        assert grid.shape == (9,)
        assert grid.interior_count() == 7
        assert np.count_nonzero(grid.boundary) == 2

    def test_disk_interior_has_full_stencil(self):
        grid = GraphGrid.disk(2, 0.1, 1.0)
        padded = np.pad(grid.active, 1, constant_values=False)
        for i, j in np.argwhere(grid.interior):
            assert padded[i:i + 3, j:j + 3].all()

    def test_coords_are_centered(self):
        grid = GraphGrid.box(2, 0.5, 1.0)
        x = grid.coords()
        assert x.shape == (5, 5, 2)
        assert_allclose(x[2, 2], [0.0, 0.0])
        assert_allclose(x[0, 4], [-1.0, 1.0])

    def test_rejects_three_dimensions(self):
        with pytest.raises(ValueError):
            GraphGrid.box(3, 0.5, 1.0)

    def test_state_requires_finite_active_values(self):
        grid = GraphGrid.box(1, 0.25, 1.0)
        w = np.zeros(grid.shape)
        w[0] = np.nan
        with pytest.raises(ValueError):
            GraphState(grid, w)


class TestDiscreteGeometry:

    def test_quadratic_derivatives_are_exact(self, paraboloid):
        _, Dw, D2w = differentiate(paraboloid)
        x = paraboloid.grid.coords()[paraboloid.grid.interior]
        assert_allclose(Dw, x, atol=1e-12)
        assert_allclose(D2w, np.broadcast_to(np.eye(2), D2w.shape), atol=1e-10)

    def test_mixed_derivative(self):
        grid = GraphGrid.box(2, 0.1, 1.0)
        state = profile_state(grid, lambda x: x[..., 0] * x[..., 1])
        _, _, D2w = differentiate(state)
        assert_allclose(D2w[:, 0, 1], 1.0, atol=1e-10)
        assert_allclose(D2w[:, 1, 0], 1.0, atol=1e-10)

    def test_paraboloid_principal_curvatures(self, paraboloid, mean2):
        fields = geom_fields(paraboloid, mean2)
        v = np.sqrt(1.0 + np.sum(fields.x ** 2, axis=-1))
        assert_allclose(fields.v, v, rtol=1e-12)
        assert_allclose(fields.lambda_min, 1.0 / v ** 3, rtol=1e-9)
        assert_allclose(fields.lambda_max, 1.0 / v, rtol=1e-9)
        assert_allclose(fields.F, 0.5 * (1.0 / v ** 3 + 1.0 / v), rtol=1e-9)

    def test_normal_is_unit_and_downward(self, paraboloid, mean2):
        fields = geom_fields(paraboloid, mean2)
        assert_allclose(np.linalg.norm(fields.nu, axis=-1), 1.0, rtol=1e-12)
        assert np.all(fields.nu[:, -1] < 0)

    def test_explicit_shape_operator_agrees(self, paraboloid, mean2):
        fields = geom_fields(paraboloid, mean2)
        explicit = shape_operator_explicit(fields.Dw, fields.D2w)
        eig = np.sort(np.linalg.eigvals(explicit).real, axis=-1)
        assert_allclose(eig, fields.lam, rtol=1e-9, atol=1e-12)

    def test_metric_inverse(self, rng):
        Dw = rng.normal(size=(20, 2))
        g, g_inv, v = metric(Dw)
        assert_allclose(g @ g_inv, np.broadcast_to(np.eye(2), g.shape), atol=1e-12)
        assert_allclose(v ** 2, 1.0 + np.sum(Dw ** 2, axis=-1))

    def test_inverse_second_fundamental_form(self, paraboloid, mean2):
        fields = geom_fields(paraboloid, mean2)
        b = inverse_second_fundamental_form(fields)
        assert_allclose(b @ fields.h, np.broadcast_to(np.eye(2), b.shape), atol=1e-10)

    def test_saddle_is_rejected(self, mean2):
        grid = GraphGrid.box(2, 0.1, 0.5)
        state = profile_state(grid, lambda x: x[..., 0] ** 2 - x[..., 1] ** 2)
        with pytest.raises(NonConvexState):
            geom_fields(state, mean2)

    def test_eigenvalues_independent_of_thread_count(self, rng, monkeypatch):
        h = np.stack([random_spd(rng, 2) for _ in range(600)])
        g = np.stack([random_spd(rng, 2) for _ in range(600)])
        monkeypatch.setenv("CURVFLOW_THREADS", "1")
        single = generalized_eigenvalues(h, g)
        monkeypatch.setenv("CURVFLOW_THREADS", "4")
        assert worker_count() == 4
        assert np.array_equal(generalized_eigenvalues(h, g), single)

    def test_map_rows_preserves_order(self, monkeypatch):
        monkeypatch.setenv("CURVFLOW_THREADS", "3")
        rows = np.arange(1000.0)
        (out,) = map_rows(lambda a: (2.0 * a,), rows)
        assert np.array_equal(out, 2.0 * rows)


class TestEulerBound:

    @pytest.mark.parametrize("n", [2, 3])
    def test_margin_nonnegative_on_random_pairs(self, n, rng):
        margins = [euler_bound_check(random_spd(rng, n), random_spd(rng, n)) for _ in range(1000)]
        assert min(margins) >= -1e-12

    def test_diagonal_pair_is_tight(self):
        h = np.diag([1.0, 2.0])
        assert euler_bound_check(np.eye(2), h) == pytest.approx(0.0, abs=1e-14)

    def test_singular_h_rejected(self):
        with pytest.raises(SingularInput):
            euler_bound_check(np.eye(2), np.array([[1.0, 1.0], [1.0, 1.0]]))


class TestRotational:

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_sphere_is_umbilic(self, n):
        K, H, lam = rotational_curvatures(sphere_profile(2.0, n), 0.7)
        assert_allclose(lam.as_array(), 0.5, rtol=1e-12)
        assert K == pytest.approx(0.5 ** n)
        assert H == pytest.approx(0.5 * n)

    def test_vectorized_matches_scalar(self):
        profile = sphere_profile(1.0, 2)
        r = np.array([0.1, 0.4, 0.8])
        K, H, lam = rotational_curvature_arrays(profile, r)
        assert lam.shape == (3, 2)
        for k, rk in enumerate(r):
            Kk, Hk, _ = rotational_curvatures(profile, rk)
            assert K[k] == pytest.approx(Kk)
            assert H[k] == pytest.approx(Hk)

    def test_nonpositive_radius_rejected(self):
        with pytest.raises(DomainError):
            rotational_curvature_arrays(sphere_profile(1.0, 2), np.array([0.0, 0.5]))


class TestInitialGraph:

    def test_sphere_cap_minimum_inside(self, sphere_state, mean2):
        report = validate_initial_graph(sphere_state, mean2)
        assert report["min_attained_inside"]
        assert report["min_nonnegative"]
        assert report["min_w"] == pytest.approx(0.0, abs=1e-14)

    def test_shifted_paraboloid_minimum_on_boundary(self, mean2):
        grid = GraphGrid.box(2, 0.1, 0.5)
        state = profile_state(grid, lambda x: 0.5 * np.sum((x - 2.0) ** 2, axis=-1))
        report = validate_initial_graph(state, mean2)
        assert not report["min_attained_inside"]

    def test_paraboloid_state_values(self):
        state = paraboloid_state(GraphGrid.box(1, 0.5, 1.0), 2.0)
        assert_allclose(state.w, [1.0, 0.25, 0.0, 0.25, 1.0])
