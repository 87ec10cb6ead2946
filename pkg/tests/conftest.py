import numpy as np
import pytest

from models.curvature_spec import (
    CurvatureSpec, GaussPowerFamily, PowerMeanFamily, WeightedProductFamily,
)
from models.graph_state import GraphGrid
from services.flow_service import paraboloid_state, sphere_cap_state


def product_half(n: int, beta: float = 1.0) -> CurvatureSpec:
    return CurvatureSpec(WeightedProductFamily(((GaussPowerFamily(), 0.5), (PowerMeanFamily(1.0), 0.5))),
                         n, beta)


SPEC_FACTORIES = {
    "mean": lambda n, beta=1.0: CurvatureSpec(PowerMeanFamily(1.0), n, beta),
    "gauss": lambda n, beta=1.0: CurvatureSpec(GaussPowerFamily(), n, beta),
    "product": product_half,
}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def cap_grid():
    """Disk |x| <= 0.5 with 17 nodes across."""
    return GraphGrid.disk(2, 1.0 / 16, 0.5)


@pytest.fixture
def sphere_state(cap_grid):
    return sphere_cap_state(cap_grid, 1.0)


@pytest.fixture
def paraboloid():
    return paraboloid_state(GraphGrid.disk(2, 0.1, 1.0), 1.0)


@pytest.fixture
def mean2():
    return SPEC_FACTORIES["mean"](2)
