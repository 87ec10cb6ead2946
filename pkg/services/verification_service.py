"""Reproduction studies: sphere convergence and graph vs support-curve agreement."""

import logging
from typing import Callable, Dict, List, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.distance import directed_hausdorff

from app import config
from models.curvature_spec import CurvatureSpec, PowerMeanFamily
from models.flow_types import ExactSphereBoundary, FlowConfig, FrozenBoundary
from models.graph_state import GraphGrid, GraphState
from .flow_service import FlowRunner, interior_error, observed_orders, sphere_cap_state
from .support_flow_service import double_and_envelope, lower_half, run_support_flow

logger = logging.getLogger(__name__)

PROFILES: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "parabola": lambda x: x ** 2,
}

# samples used to resolve profiles before the brute-force support evaluation
_DENSE_SAMPLES = 20001


def sphere_convergence(spec: CurvatureSpec, r0: float, grids: Sequence[int], t_end: float,
                       cap_radius: float = 0.5, safety: float = config.DEFAULT_SAFETY) -> List[dict]:
    """Max interior error against the exact cap for each grid size, with observed orders."""
    rows = []
    for nodes in grids:
        spacing = 2.0 * cap_radius / (nodes - 1)
        grid = GraphGrid.disk(spec.n, spacing, cap_radius)
        w0 = sphere_cap_state(grid, r0, r0)
        cfg = FlowConfig(spec=spec, t_end=t_end, boundary=ExactSphereBoundary(r0, r0),
                         safety=safety, snapshot_every=config.MAX_STEPS)
        traj = FlowRunner(cfg).run(w0)
        final = traj.final_state()
        row = {"nodes": nodes, "spacing": spacing, "steps": traj.steps, "t": final.t,
               "max_error": interior_error(final, r0, spec.beta, r0) if traj.completed else np.nan,
               "order": np.nan, "status": "ok" if traj.completed else traj.error["error"]}
        rows.append(row)
        logger.info("sphere grid %d: error %.3e after %d steps", nodes, row["max_error"], traj.steps)
    done = [r for r in rows if np.isfinite(r["max_error"])]
    if len(done) > 1:
        orders = observed_orders([r["spacing"] for r in done], [r["max_error"] for r in done])
        for row, order in zip(done[1:], orders):
            row["order"] = order
    return rows


def parallel_graph(x: np.ndarray, w: np.ndarray, eps: float) -> np.ndarray:
    """Points of the curve at distance eps below the graph of (x, w), shape (k, 2)."""
    slope = np.gradient(w, x)
    norm = np.sqrt(1.0 + slope ** 2)
    return np.stack([x + eps * slope / norm, w - eps / norm], axis=-1)


def _window(points: np.ndarray, half_width: float) -> np.ndarray:
    return points[np.abs(points[:, 0]) <= half_width]


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    return float(max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0]))


def graph_vs_support(profile: Callable[[np.ndarray], np.ndarray], beta: float, graph_nodes: int,
                     support_nodes: int, t_end: float, level: float = 1.0, eps: float = 1.0 / 64,
                     window: float = 0.5, safety: float = config.DEFAULT_SAFETY) -> dict:
    """Flow one n = 1 profile both ways and compare the curves near the bottom at t_end.

    The closed curve is the doubled profile with its eps-envelope; the graph
    run starts from the lower half of that envelope over the sub-level
    interval with frozen ends, so both runs start from the same curve and
    the comparison window stays away from the frozen ends.
    """
    spec = CurvatureSpec(PowerMeanFamily(1.0), 1, beta)
    half = 1.5 * sublevel_half_width(profile, level)
    x = np.linspace(-half, half, _DENSE_SAMPLES)
    w = profile(x)
    curve = double_and_envelope(x, w, level, eps, support_nodes, beta)
    support = run_support_flow(curve, t_end=t_end, safety=safety)
    support_points = lower_half(support.curves[-1])

    inside = w <= level
    edge = float(np.min(np.abs(x[~inside]))) if np.any(~inside) else half
    spacing = 2.0 * edge / (graph_nodes - 1)
    grid = GraphGrid.box(1, spacing, edge)
    envelope = parallel_graph(x, w, eps)
    nodes_x = grid.coords()[..., 0]
    w0 = GraphState(grid, np.interp(nodes_x, envelope[:, 0], envelope[:, 1]), 0.0)
    cfg = FlowConfig(spec=spec, t_end=t_end, boundary=FrozenBoundary(), safety=safety,
                     snapshot_every=config.MAX_STEPS)
    traj = FlowRunner(cfg).run(w0)
    final = traj.final_state()
    graph_points = np.stack([nodes_x, final.w], axis=-1)

    distance = hausdorff(_window(graph_points, window), _window(support_points, window))
    logger.info("cross validation %d/%d nodes: Hausdorff %.3e", graph_nodes, support_nodes, distance)
    return {"graph_nodes": graph_nodes, "support_nodes": support_nodes, "t": final.t,
            "hausdorff": distance, "graph_steps": traj.steps, "support_steps": support.steps,
            "status": "ok" if traj.completed else traj.error["error"],
            "support_curve": support.curves[-1]}


def sublevel_half_width(profile: Callable[[np.ndarray], np.ndarray], level: float) -> float:
    """Half-width of {profile <= level} for an even convex profile."""

    def excess(x: float) -> float:
        return float(profile(np.array([x]))[0]) - level

    if excess(0.0) > 0.0:
        raise ValueError("profile lies above the level at the origin")
    hi = 1.0
    while excess(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError("profile does not reach the level")
    return float(brentq(excess, 0.0, hi, xtol=1e-14))
