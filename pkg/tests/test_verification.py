import numpy as np
import pytest

from services.verification_service import (
    PROFILES, graph_vs_support, hausdorff, parallel_graph, sphere_convergence, sublevel_half_width,
)
from tests.conftest import SPEC_FACTORIES


class TestHelpers:

    def test_hausdorff_of_shifted_sets(self):
        a = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert hausdorff(a, a) == 0.0
        assert hausdorff(a, a + [0.0, 0.25]) == pytest.approx(0.25)

    def test_parallel_graph_of_parabola(self):
        x = np.linspace(-1.0, 1.0, 2001)
        points = parallel_graph(x, x ** 2, 0.1)
        bottom = points[1000]
        assert bottom == pytest.approx([0.0, -0.1], abs=1e-12)
        # every offset point sits at distance eps from the graph
        distance = np.min(np.hypot(points[500, 0] - x, points[500, 1] - x ** 2))
        assert distance == pytest.approx(0.1, abs=1e-4)

    def test_sublevel_half_width(self):
        assert sublevel_half_width(lambda x: x ** 2, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert sublevel_half_width(lambda x: 0.5 * x ** 2, 8.0) == pytest.approx(4.0, abs=1e-12)
        with pytest.raises(ValueError):
            sublevel_half_width(lambda x: x ** 2 + 2.0, 1.0)

    def test_sphere_convergence_rows(self, mean2):
        rows = sphere_convergence(mean2, 1.0, [9, 17], 0.02)
        assert [r["nodes"] for r in rows] == [9, 17]
        assert np.isnan(rows[0]["order"])
        assert np.isfinite(rows[1]["order"])


@pytest.mark.slow
class TestReproduction:

    @pytest.mark.parametrize("name", ["mean", "gauss", "product"])
    def test_sphere_error_on_65_nodes(self, name):
        rows = sphere_convergence(SPEC_FACTORIES[name](2), 1.0, [33, 65], 0.2)
        assert all(r["status"] == "ok" for r in rows)
        assert rows[1]["max_error"] <= 5e-3

    def test_graph_and_support_flows_agree(self):
        coarse = graph_vs_support(PROFILES["parabola"], 1.0, 129, 128, 0.1)
        fine = graph_vs_support(PROFILES["parabola"], 1.0, 257, 256, 0.1)
        assert coarse["status"] == fine["status"] == "ok"
        assert fine["hausdorff"] < coarse["hausdorff"]
        assert fine["hausdorff"] < 5e-2

    def test_graph_and_support_flows_agree_at_full_resolution(self):
        result = graph_vs_support(PROFILES["parabola"], 1.0, 513, 512, 0.1)
        assert result["status"] == "ok"
        assert result["support_nodes"] == 512
        assert result["hausdorff"] <= 1e-2
