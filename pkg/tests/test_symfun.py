import numpy as np
import pytest
from numpy.testing import assert_allclose

from models.curvature_spec import (
    CurvatureSpec, ElemSymRootFamily, GaussPowerFamily, Lambda, PowerMeanFamily,
    WeightedProductFamily,
)
from models.errors import AsymmetricDirection, DimensionMismatch, DomainError, ValidationError
from services.curvature_families import builtin_zoo, elementary_symmetric, function_for
from services.symfun_service import (
    check_condition1, ddF_direction, derivatives, dual_derivatives, eval_dual, eval_f,
    eval_F_matrix, sample_positive_cone, verify_lemma2,
)


def zoo_ids(specs):
    return [s.describe() for s in specs]


class TestLambda:

    def test_sorted_on_construction(self):
        assert Lambda.of(3.0, 1.0, 2.0).values == (1.0, 2.0, 3.0)

    @pytest.mark.parametrize("values", [(1.0, 0.0), (1.0, -2.0), (np.inf, 1.0)])
    def test_rejects_outside_positive_cone(self, values):
        with pytest.raises(DomainError):
            Lambda.of(*values)

    def test_inverse(self):
        assert Lambda.of(2.0, 4.0).inverse().values == (0.25, 0.5)


class TestCurvatureSpec:

    def test_beta_below_one_rejected(self):
        with pytest.raises(ValidationError):
            CurvatureSpec(PowerMeanFamily(1.0), 2, 0.5)

    def test_product_weights_must_sum_to_one(self):
        family = WeightedProductFamily(((GaussPowerFamily(), 0.5), (PowerMeanFamily(1.0), 0.4)))
        with pytest.raises(ValidationError) as info:
            CurvatureSpec(family, 2)
        assert any("sum to 1" in msg for _, msg in info.value.errors)

    def test_esym_order_bounded_by_dimension(self):
        with pytest.raises(ValidationError):
            CurvatureSpec(ElemSymRootFamily(4), 3)

    def test_zoo_size(self):
        assert len(builtin_zoo(3)) == 10


class TestEvaluation:

    def test_mean_normalized(self):
        assert eval_f(CurvatureSpec(PowerMeanFamily(1.0), 3), Lambda.of(1, 1, 1)) == pytest.approx(1.0)

    def test_gauss_value(self):
        assert eval_f(CurvatureSpec(GaussPowerFamily(), 3), Lambda.of(1, 2, 4)) == pytest.approx(2.0)

    def test_esym_two_value(self):
        # E_2(1, 2, 3) = 11, C(3, 2) = 3
        spec = CurvatureSpec(ElemSymRootFamily(2), 3)
        assert eval_f(spec, Lambda.of(1, 2, 3)) == pytest.approx(np.sqrt(11.0 / 3.0))

    def test_elementary_symmetric_polynomials(self):
        lam = np.array([1.0, 2.0, 3.0])
        assert [elementary_symmetric(lam, k) for k in range(5)] == [1.0, 6.0, 11.0, 6.0, 0.0]

    @pytest.mark.parametrize("spec", builtin_zoo(3), ids=zoo_ids(builtin_zoo(3)))
    def test_homogeneous_symmetric_normalized(self, spec, rng):
        lam = rng.uniform(0.1, 5.0, size=3)
        assert eval_f(spec, 2.0 * lam) == pytest.approx(2.0 * eval_f(spec, lam), rel=1e-12)
        assert eval_f(spec, lam[::-1]) == pytest.approx(eval_f(spec, lam), rel=1e-12)
        assert eval_f(spec, np.ones(3)) == pytest.approx(1.0, abs=1e-12)

    def test_domain_error(self, mean2):
        with pytest.raises(DomainError):
            eval_f(mean2, np.array([1.0, 0.0]))

    def test_dimension_mismatch(self, mean2):
        with pytest.raises(DimensionMismatch):
            eval_f(mean2, np.array([1.0, 2.0, 3.0]))

    def test_dual_of_mean_is_harmonic_mean(self, mean2):
        assert eval_dual(mean2, np.array([1.0, 2.0])) == pytest.approx(4.0 / 3.0)

    def test_matrix_function_uses_eigenvalues(self):
        spec = CurvatureSpec(GaussPowerFamily(), 2)
        A = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert eval_F_matrix(spec, A) == pytest.approx(np.sqrt(3.0))


class TestDerivatives:

    @pytest.mark.parametrize("spec", builtin_zoo(3), ids=zoo_ids(builtin_zoo(3)))
    def test_gradient_and_hessian_match_finite_differences(self, spec):
        lam = np.array([0.7, 1.3, 2.9])
        bundle = derivatives(spec, lam)
        fn = function_for(spec)
        step = 1e-6
        eye = np.eye(3)
        fd_grad = np.array([(fn.value(lam + step * e) - fn.value(lam - step * e)) / (2 * step) for e in eye])
        fd_hess = np.array([(fn.gradient(lam + step * e) - fn.gradient(lam - step * e)) / (2 * step)
                            for e in eye])
        assert_allclose(bundle.grad, fd_grad, rtol=1e-7, atol=1e-9)
        assert_allclose(bundle.hess, fd_hess, rtol=1e-6, atol=1e-8)

    @pytest.mark.parametrize("spec", builtin_zoo(3), ids=zoo_ids(builtin_zoo(3)))
    def test_euler_relation_and_monotonicity(self, spec, rng):
        lam = np.sort(rng.uniform(0.1, 10.0, size=3))
        bundle = derivatives(spec, lam)
        assert np.all(bundle.grad > 0)
        assert bundle.euler_residual(Lambda.of(lam)) == pytest.approx(0.0, abs=1e-10 * bundle.value)

    def test_dual_hessian_matches_finite_differences(self):
        spec = CurvatureSpec(PowerMeanFamily(2.0), 2)
        tau = np.array([0.8, 1.7])
        fn = function_for(spec)
        step = 1e-6
        fd = np.array([(fn.dual_gradient(tau + step * e) - fn.dual_gradient(tau - step * e)) / (2 * step)
                       for e in np.eye(2)])
        assert_allclose(dual_derivatives(spec, tau).hess, fd, rtol=1e-6, atol=1e-8)

    @pytest.mark.parametrize("spec", builtin_zoo(3), ids=zoo_ids(builtin_zoo(3)))
    def test_dual_scaling_degrees(self, spec):
        tau = np.array([0.4, 1.1, 2.5])
        base = dual_derivatives(spec, tau)
        scaled = dual_derivatives(spec, 3.0 * tau)
        assert scaled.value == pytest.approx(3.0 * base.value, rel=1e-12)
        assert_allclose(scaled.hess, base.hess / 3.0, rtol=1e-9, atol=1e-14)


class TestDirectionalSecondDerivative:

    @pytest.mark.parametrize("expr_spec", [
        CurvatureSpec(GaussPowerFamily(), 3),
        CurvatureSpec(PowerMeanFamily(2.0), 3),
        CurvatureSpec(ElemSymRootFamily(2), 3),
        CurvatureSpec(WeightedProductFamily(((GaussPowerFamily(), 0.5), (PowerMeanFamily(1.0), 0.5))), 3),
    ], ids=["gauss", "power2", "esym2", "product"])
    def test_matches_matrix_finite_difference(self, expr_spec, rng):
        lam = Lambda.of(1.0, 2.0, 3.5)
        B = rng.normal(size=(3, 3))
        B = 0.5 * (B + B.T)
        A = np.diag(lam.as_array())
        eps = 1e-4
        fd = (eval_F_matrix(expr_spec, A + eps * B) - 2.0 * eval_F_matrix(expr_spec, A)
              + eval_F_matrix(expr_spec, A - eps * B)) / eps ** 2
        exact = ddF_direction(expr_spec, lam, B)
        assert exact == pytest.approx(fd, rel=1e-5, abs=1e-6)

    def test_umbilic_limit_is_finite(self):
        spec = CurvatureSpec(GaussPowerFamily(), 2)
        B = np.array([[0.0, 1.0], [1.0, 0.0]])
        # off-diagonal quotient tends to f^11 - f^12 = -1/(2 lambda) at lambda = (1, 1)
        assert ddF_direction(spec, Lambda.of(1.0, 1.0), B) == pytest.approx(-1.0)

    def test_rejects_asymmetric_direction(self):
        spec = CurvatureSpec(GaussPowerFamily(), 2)
        with pytest.raises(AsymmetricDirection):
            ddF_direction(spec, Lambda.of(1.0, 2.0), np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_wrong_shape(self):
        spec = CurvatureSpec(GaussPowerFamily(), 2)
        with pytest.raises(DimensionMismatch):
            ddF_direction(spec, Lambda.of(1.0, 2.0), np.eye(3))


class TestInverseConcavity:

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_trace_and_pair_residuals_nonnegative_on_zoo(self, n):
        lam = sample_positive_cone(n, 200, seed=11, low=0.2, high=5.0)
        for spec in builtin_zoo(n):
            for row in lam:
                r1, r2 = verify_lemma2(spec, row)
                assert r1 >= -1e-10
                assert r2 >= -1e-10

    def test_one_dimension_has_no_pairs(self):
        r1, r2 = verify_lemma2(CurvatureSpec(PowerMeanFamily(1.0), 1), np.array([2.0]))
        assert r1 == pytest.approx(0.0, abs=1e-12)
        assert r2 == np.inf

    @pytest.mark.parametrize("n", [2, 3])
    def test_condition1_certified_for_zoo(self, n):
        for spec in builtin_zoo(n):
            report = check_condition1(spec, 200, seed=7)
            failed = [e.condition for e in report.entries if not e.passed]
            assert report.passed, f"{spec.describe()} failed {failed}"

    def test_report_is_deterministic(self):
        spec = CurvatureSpec(ElemSymRootFamily(2), 3)
        assert check_condition1(spec, 50, seed=3).to_dict() == check_condition1(spec, 50, seed=3).to_dict()

    def test_partial_esym_decay_marked_sampled_only(self):
        report = check_condition1(CurvatureSpec(ElemSymRootFamily(1), 3), 20, seed=1)
        assert report.entry("vi_dual_vanishes").note == "sampled only"

    def test_rejects_empty_sample(self, mean2):
        with pytest.raises(ValueError):
            check_condition1(mean2, 0, seed=1)

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_full_suite_ten_thousand_samples(self, n):
        for spec in builtin_zoo(n):
            assert check_condition1(spec, 10_000, seed=7).passed
