import numpy as np
import pytest

from models.errors import ConstraintViolated, ValidationError
from models.estimate_types import BarrierParams
from services.barrier_service import (
    barrier_coefficient, barrier_radius, barrier_supersolution_check, check_constraint,
    constraint_lhs, maximal_delta,
)


def params(**overrides) -> BarrierParams:
    values = dict(R0=0.5, sigma=0.5, delta=0.01, s=1.0, beta=1.0, n=2, t0=0.1)
    values.update(overrides)
    return BarrierParams(**values)


class TestBarrierParams:

    @pytest.mark.parametrize("field, value", [
        ("R0", 1.0), ("sigma", 0.0), ("delta", 0.0), ("s", 1.5), ("beta", 0.5), ("t0", 0.0),
    ])
    def test_invalid(self, field, value):
        with pytest.raises(ValidationError) as info:
            params(**{field: value})
        assert info.value.errors[0][0] == field

    def test_delta_exponent(self):
        assert params(s=0.5, beta=2.0, n=2).delta_exponent == pytest.approx(0.5)


class TestConstraint:

    def test_coefficient(self):
        assert barrier_coefficient(params()) == pytest.approx(4.0 * 2.0 ** 2.5)

    def test_time_horizon(self):
        # delta = 0.01 leaves room for t0 up to about 0.106
        check_constraint(params(t0=0.1))
        with pytest.raises(ConstraintViolated):
            check_constraint(params(t0=0.11))

    @pytest.mark.parametrize("s, beta", [(0.25, 1.0), (1.0, 2.0)])
    def test_maximal_delta_saturates_constraint(self, s, beta):
        delta = maximal_delta(0.5, 0.5, s, beta, 2, 0.01)
        p = params(s=s, beta=beta, t0=0.01, delta=delta)
        assert constraint_lhs(p) <= 0.25
        assert constraint_lhs(p) == pytest.approx(0.25, rel=1e-10)

    def test_radius_at_band_top(self):
        p = params()
        assert barrier_radius(p, p.l, 0.0) == pytest.approx(p.R0)
        assert barrier_radius(p, p.l - 1.0, 0.0) == pytest.approx(p.R0 - p.delta)


class TestSupersolution:

    @pytest.mark.parametrize("beta", [1.0, 2.0])
    @pytest.mark.parametrize("s", [0.25, 0.5, 1.0])
    def test_chain_holds_at_maximal_delta(self, s, beta):
        delta = maximal_delta(0.5, 0.5, s, beta, 2, 0.01)
        report = barrier_supersolution_check(params(s=s, beta=beta, t0=0.01, delta=delta), 10_000, seed=7)
        assert report.passed
        assert report.margin > 0
        assert {"curvature", "mean_curvature", "gradient", "barrier_speed", "actual_speed"} <= set(report.extras)

    def test_deterministic_in_seed(self):
        p = params(t0=0.01, delta=0.01)
        first = barrier_supersolution_check(p, 500, seed=3).to_dict()
        assert first == barrier_supersolution_check(p, 500, seed=3).to_dict()

    def test_violated_constraint_raises(self):
        with pytest.raises(ConstraintViolated):
            barrier_supersolution_check(params(t0=0.5), 10)

    def test_three_dimensions(self):
        delta = maximal_delta(0.5, 0.5, 0.5, 1.0, 3, 0.01)
        report = barrier_supersolution_check(params(s=0.5, n=3, t0=0.01, delta=delta), 2000)
        assert report.passed
        assert np.isfinite(report.margin)
