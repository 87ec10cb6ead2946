"""Explicit time integration of the graphical flow and the shrinking-sphere oracle."""

import logging
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from app import config
from models.curvature_spec import CurvatureSpec
from models.errors import (
    BlowUp, ExtinctionReached, NumericalAbort, OutsideCap,
)
from models.flow_types import (
    ExactSphereBoundary, FlowConfig, FrozenBoundary, Snapshot, Trajectory,
)
from models.graph_state import GeomFields, GraphGrid, GraphState
from .geometry_service import geom_fields

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Shrinking sphere
# ---------------------------------------------------------------------------

def extinction_time(r0: float, beta: float) -> float:
    return r0 ** (beta + 1.0) / (beta + 1.0)


def sphere_radius(r0: float, beta: float, t: float) -> float:
    """r(t) = (r0^(beta+1) - (beta+1) t)^(1/(beta+1)), solving dr/dt = -r^(-beta)."""
    T = extinction_time(r0, beta)
    if t >= T:
        raise ExtinctionReached("sphere has reached extinction", t=t, t_extinction=T)
    if t < 0:
        raise ValueError("time must be nonnegative")
    if t == 0:
        return float(r0)
    return float((r0 ** (beta + 1.0) - (beta + 1.0) * t) ** (1.0 / (beta + 1.0)))


def sphere_radius_ode(r0: float, beta: float, times: Sequence[float], rtol: float = 1e-10) -> np.ndarray:
    """Radii from integrating dr/dt = -r^(-beta) numerically; reference for ``sphere_radius``."""
    times = np.asarray(times, dtype=float)
    if np.any(times >= extinction_time(r0, beta)):
        raise ExtinctionReached("requested time past extinction", t=float(np.max(times)),
                                t_extinction=extinction_time(r0, beta))
    if not np.any(times > 0.0):
        return np.full(times.shape, float(r0))
    sol = solve_ivp(lambda _, r: -r ** (-beta), (0.0, float(np.max(times))), [r0],
                    t_eval=np.sort(times), method="DOP853", rtol=rtol, atol=rtol * 1e-2)
    order = np.argsort(np.argsort(times))
    return sol.y[0][order]


def sphere_cap_reference(r0: float, beta: float, center_height: float, t: float, x) -> np.ndarray:
    """Height c - sqrt(r(t)^2 - |x|^2) of the shrinking lower hemisphere."""
    r = sphere_radius(r0, beta, t)
    x = np.asarray(x, dtype=float)
    rho2 = np.sum(x ** 2, axis=-1) if x.ndim else x ** 2
    if np.any(rho2 >= r ** 2):
        raise OutsideCap("point lies outside the current cap", t=t, radius=r,
                         max_abs_x=float(np.sqrt(np.max(rho2))))
    return center_height - np.sqrt(r ** 2 - rho2)


def sphere_cap_time_derivative(r0: float, beta: float, t: float, x) -> np.ndarray:
    """Analytic d/dt of ``sphere_cap_reference``: r^(1-beta) / sqrt(r^2 - |x|^2)."""
    r = sphere_radius(r0, beta, t)
    x = np.asarray(x, dtype=float)
    rho2 = np.sum(x ** 2, axis=-1) if x.ndim else x ** 2
    return r ** (1.0 - beta) / np.sqrt(r ** 2 - rho2)


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------

def _fill(grid: GraphGrid, values: np.ndarray) -> np.ndarray:
    return np.where(grid.active, values, np.nan)


def sphere_cap_state(grid: GraphGrid, r0: float, center_height: Optional[float] = None) -> GraphState:
    c = r0 if center_height is None else center_height
    x = grid.coords()
    rho2 = np.sum(x ** 2, axis=-1)
    if np.any(rho2[grid.active] >= r0 ** 2):
        raise OutsideCap("grid domain is not covered by the cap", radius=r0)
    return GraphState(grid, _fill(grid, c - np.sqrt(np.maximum(r0 ** 2 - rho2, 0.0))), 0.0)


def paraboloid_state(grid: GraphGrid, curvature: float = 1.0) -> GraphState:
    x = grid.coords()
    return GraphState(grid, _fill(grid, 0.5 * curvature * np.sum(x ** 2, axis=-1)), 0.0)


def profile_state(grid: GraphGrid, profile: Callable[[np.ndarray], np.ndarray]) -> GraphState:
    """Initial data from any callable of the coordinates (..., n)."""
    return GraphState(grid, _fill(grid, profile(grid.coords())), 0.0)


def table_state(grid: GraphGrid, path: Path) -> GraphState:
    """Initial data from a CSV table with columns x1[, x2], w on grid nodes."""
    table = pd.read_csv(path)
    w = np.full(grid.shape, np.nan)
    cols = [f"x{d + 1}" for d in range(grid.n)]
    idx = np.rint((table[cols].to_numpy() - np.asarray(grid.origin)) / grid.spacing).astype(int)
    inside = np.all((idx >= 0) & (idx < np.asarray(grid.shape)), axis=1)
    w[tuple(idx[inside].T)] = table["w"].to_numpy()[inside]
    missing = grid.active & ~np.isfinite(w)
    if np.any(missing):
        raise ValueError(f"table {path} leaves {int(np.count_nonzero(missing))} grid nodes without data")
    return GraphState(grid, _fill(grid, w), 0.0)


# ---------------------------------------------------------------------------
# Time stepping
# ---------------------------------------------------------------------------

def rhs_from_fields(fields: GeomFields) -> np.ndarray:
    return fields.v * fields.Phi


def rhs(state: GraphState, spec: CurvatureSpec,
        lambda_floor: float = config.LAMBDA_FLOOR) -> np.ndarray:
    """sqrt(1 + |Dw|^2) F^beta at interior nodes (C order)."""
    return rhs_from_fields(geom_fields(state, spec, lambda_floor))


def cfl_from_fields(fields: GeomFields, spec: CurvatureSpec, spacing: float, safety: float) -> float:
    n = fields.Dw.shape[-1]
    coeff = (fields.v * spec.beta * fields.F ** (spec.beta - 1.0)
             * np.max(fields.grad_f, axis=-1) * fields.v ** 2)
    return float(safety * spacing ** 2 / (2.0 * n * np.max(coeff)))


def cfl_dt(state: GraphState, spec: CurvatureSpec, safety: float = config.DEFAULT_SAFETY,
           lambda_floor: float = config.LAMBDA_FLOOR) -> float:
    """safety * dx^2 / (2n max(v beta F^(beta-1) max f^i (1 + |Dw|^2)))."""
    return cfl_from_fields(geom_fields(state, spec, lambda_floor), spec, state.grid.spacing, safety)


def apply_boundary(state: GraphState, initial: GraphState, boundary, beta: float) -> None:
    """Write Dirichlet data on boundary nodes in place."""
    grid = state.grid
    mask = grid.boundary
    if isinstance(boundary, ExactSphereBoundary):
        x = grid.coords()[mask]
        state.w[mask] = sphere_cap_reference(boundary.r0, beta, boundary.center_height, state.t, x)
    elif isinstance(boundary, FrozenBoundary):
        state.w[mask] = initial.w[mask]
    else:
        raise TypeError(f"unknown boundary policy {boundary!r}")


def _advance(state: GraphState, fields: GeomFields, dt: float, cfg: FlowConfig,
             initial: GraphState) -> GraphState:
    grid = state.grid
    interior = grid.interior
    k1 = rhs_from_fields(fields)
    if np.max(np.abs(k1)) > config.BLOWUP_THRESHOLD:
        raise BlowUp("speed exceeds blow-up threshold", t=state.t, max_rhs=float(np.max(np.abs(k1))))
    half = state.copy(t=state.t + 0.5 * dt)
    half.w[interior] = state.w[interior] + 0.5 * dt * k1
    apply_boundary(half, initial, cfg.boundary, cfg.spec.beta)
    k2 = rhs(half, cfg.spec, cfg.lambda_floor)
    if np.max(np.abs(k2)) > config.BLOWUP_THRESHOLD:
        raise BlowUp("speed exceeds blow-up threshold", t=half.t, max_rhs=float(np.max(np.abs(k2))))
    new = state.copy(t=state.t + dt)
    new.w[interior] = state.w[interior] + dt * k2
    apply_boundary(new, initial, cfg.boundary, cfg.spec.beta)
    return new


def step(state: GraphState, cfg: FlowConfig, initial: Optional[GraphState] = None,
         dt: Optional[float] = None) -> GraphState:
    """One explicit midpoint step; ``initial`` supplies Frozen boundary values."""
    fields = geom_fields(state, cfg.spec, cfg.lambda_floor)
    if dt is None:
        dt = cfl_from_fields(fields, cfg.spec, state.grid.spacing, cfg.safety)
    return _advance(state, fields, dt, cfg, state if initial is None else initial)


def _check_cap_cover(state: GraphState, boundary: ExactSphereBoundary, beta: float,
                     t_next: float, t_end: float) -> None:
    """Abort once the exact cap stops covering the boundary with one cell of clearance."""
    grid = state.grid
    reach = float(np.sqrt(np.max(np.sum(grid.coords()[grid.boundary] ** 2, axis=-1))))
    T = extinction_time(boundary.r0, beta)
    if t_next >= T or sphere_radius(boundary.r0, beta, t_next) - reach < grid.spacing:
        context = dict(t=state.t, t_extinction=T, cap_reach=reach)
        if t_end >= T:
            raise ExtinctionReached("sphere extinction ahead; boundary data becomes singular", **context)
        raise OutsideCap("exact cap no longer covers the grid boundary", **context)


class FlowRunner:
    """Integrates a graph to t_end, storing snapshots and evaluating monitors on the way."""

    def __init__(self, cfg: FlowConfig, monitors: Sequence = ()):
        self.config = cfg
        self.monitors = list(monitors)

    def _snapshot(self, traj: Trajectory, state: GraphState, fields: GeomFields, dt: float) -> None:
        nodes = {"u": fields.w.copy(), "v": fields.v, "lambda_min": fields.lambda_min.copy(),
                 "lambda_max": fields.lambda_max.copy(), "F": fields.F}
        snap = Snapshot(t=state.t, dt=dt, state=state, nodes=nodes)
        previous = traj.snapshots[-1].monitors if traj.snapshots else {}
        traj.append(snap)
        # running margin: each monitor sees only the t = 0 snapshot and the new one
        view = Trajectory(config=traj.config, snapshots=traj.snapshots[:1] + traj.snapshots[1:][-1:])
        for monitor in self.monitors:
            snap.monitors[monitor.name] = min(monitor(view).margin, previous.get(monitor.name, np.inf))
        logger.debug("snapshot t=%.6g dt=%.3g max_v=%.4g", state.t, dt, snap.summary["max_v"])

    def run(self, w0: GraphState) -> Trajectory:
        cfg = self.config
        traj = Trajectory(config=cfg)
        initial = w0.copy(t=0.0)
        fields = geom_fields(initial, cfg.spec, cfg.lambda_floor)
        self._snapshot(traj, initial, fields, 0.0)
        logger.info("flow run: %s beta=%g t_end=%g on %d interior nodes",
                    cfg.spec.describe(), cfg.spec.beta, cfg.t_end, fields.count)
        state = initial
        t_tol = 1e-12 * cfg.t_end
        dt = taken = 0.0
        while state.t < cfg.t_end - t_tol:
            try:
                if traj.steps >= cfg.max_steps:
                    raise BlowUp("step limit reached", t=state.t, steps=traj.steps)
                dt = min(cfl_from_fields(fields, cfg.spec, state.grid.spacing, cfg.safety),
                         cfg.t_end - state.t)
                if dt <= t_tol:
                    raise BlowUp("time step collapsed", t=state.t, dt=dt)
                if isinstance(cfg.boundary, ExactSphereBoundary):
                    _check_cap_cover(state, cfg.boundary, cfg.spec.beta, state.t + dt, cfg.t_end)
                new_state = _advance(state, fields, dt, cfg, initial)
                fields = geom_fields(new_state, cfg.spec, cfg.lambda_floor)
                state, taken = new_state, dt
            except NumericalAbort as err:
                # state and fields still hold the last valid time level
                traj.error = dict(err.to_dict(), t=float(state.t))
                logger.warning("flow aborted at t=%.6g: %s", state.t, err.message)
                if state.t > traj.snapshots[-1].t:
                    self._snapshot(traj, state, fields, taken)
                break
            traj.steps += 1
            done = state.t >= cfg.t_end - t_tol
            if done or traj.steps % cfg.snapshot_every == 0:
                self._snapshot(traj, state, fields, taken)
        logger.info("flow finished at t=%.6g after %d steps (%s)", state.t, traj.steps,
                    "complete" if traj.completed else traj.error["error"])
        return traj


def run(w0: GraphState, cfg: FlowConfig, monitors: Sequence = ()) -> Trajectory:
    return FlowRunner(cfg, monitors).run(w0)


# ---------------------------------------------------------------------------
# Oracle trajectory
# ---------------------------------------------------------------------------

def sphere_oracle_trajectory(grid: GraphGrid, spec: CurvatureSpec, r0: float,
                             times: Iterable[float], center_height: Optional[float] = None) -> Trajectory:
    """Exact shrinking-sphere trajectory sampled on ``grid`` with analytic node fields."""
    c = r0 if center_height is None else center_height
    cfg = FlowConfig(spec=spec, t_end=max(max(times), 1e-300),
                     boundary=ExactSphereBoundary(r0, c))
    traj = Trajectory(config=cfg)
    x = grid.coords()
    interior = grid.interior
    rho2 = np.sum(x[interior] ** 2, axis=-1)
    previous = 0.0
    for t in sorted(times):
        r = sphere_radius(r0, spec.beta, t)
        w = _fill(grid, c - np.sqrt(np.maximum(r ** 2 - np.sum(x ** 2, axis=-1), 0.0)))
        if np.any(np.sum(x[grid.active] ** 2, axis=-1) >= r ** 2):
            raise OutsideCap("grid domain is not covered by the cap", t=t, radius=r)
        state = GraphState(grid, w, t)
        nodes = {
            "u": w[interior],
            "v": r / np.sqrt(r ** 2 - rho2),
            "lambda_min": np.full(rho2.shape, 1.0 / r),
            "lambda_max": np.full(rho2.shape, 1.0 / r),
            "F": np.full(rho2.shape, 1.0 / r),
        }
        traj.append(Snapshot(t=t, dt=t - previous, state=state, nodes=nodes))
        previous = t
    return traj


def interior_error(state: GraphState, r0: float, beta: float, center_height: float) -> float:
    """Max interior deviation from the exact cap at the state's time."""
    grid = state.grid
    exact = sphere_cap_reference(r0, beta, center_height, state.t, grid.coords()[grid.interior])
    return float(np.max(np.abs(state.w[grid.interior] - exact)))


def observed_orders(spacings: Sequence[float], errors: Sequence[float]) -> List[float]:
    """log(e_k / e_{k+1}) / log(h_k / h_{k+1}) for consecutive refinements."""
    return [float(np.log(errors[k] / errors[k + 1]) / np.log(spacings[k] / spacings[k + 1]))
            for k in range(len(errors) - 1)]
