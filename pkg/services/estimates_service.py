"""Runtime monitors for the local a priori estimates along a flow trajectory.

Every monitor is a pure function of a Trajectory and returns a MonitorReport.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence

import numpy as np

from app import config
from models.curvature_spec import CurvatureSpec
from models.errors import NotEnclosedInitially, ValidationError
from models.estimate_types import CutoffParams, MonitorReport
from models.flow_types import Snapshot, Trajectory
from .curvature_families import function_for
from .flow_service import extinction_time, sphere_radius

logger = logging.getLogger(__name__)


def cutoff(u, t: float, p: CutoffParams, with_gamma: bool = True):
    """(R - u - gamma t)_+ or (R - u)_+; vectorized over u."""
    shift = p.gamma * t if with_gamma else 0.0
    value = np.maximum(p.R - np.asarray(u, dtype=float) - shift, 0.0)
    return float(value) if np.ndim(value) == 0 else value


def _node_label(snap: Snapshot, k: int) -> str:
    grid = snap.state.grid
    return str(tuple(int(i) for i in np.argwhere(grid.interior)[k]))


def monitor_gradient_estimate(traj: Trajectory, p: CutoffParams) -> MonitorReport:
    """max v * phi_gamma <= R max(sup_{u(0) <= R} v, (beta - 1)/gamma) over every snapshot."""
    beta = traj.config.spec.beta
    first = traj.snapshots[0].nodes
    region0 = first["u"] <= p.R
    sup_v0 = float(np.max(first["v"][region0])) if np.any(region0) else 0.0
    rhs = p.R * max(sup_v0, (beta - 1.0) / p.gamma)
    lhs, where = -np.inf, {}
    for snap in traj.snapshots:
        weighted = snap.nodes["v"] * cutoff(snap.nodes["u"], snap.t, p, with_gamma=True)
        k = int(np.argmax(weighted))
        if weighted[k] > lhs:
            lhs, where = float(weighted[k]), {"t": snap.t, "node": _node_label(snap, k)}
    return MonitorReport("gradient", lhs, rhs, config.GRADIENT_MONITOR_RTOL * abs(rhs), where,
                         {"sup_v0": sup_v0})


def _weighted_lambda_inf(snap: Snapshot, p: CutoffParams):
    u = snap.nodes["u"]
    region = u <= p.sigma * p.R
    if not np.any(region):
        return np.inf, None
    values = np.where(region, cutoff(u, snap.t, p, with_gamma=False) * snap.nodes["lambda_min"], np.inf)
    k = int(np.argmin(values))
    return float(values[k]), k


def monitor_lambda_min(traj: Trajectory, p: CutoffParams) -> MonitorReport:
    """inf_{u(t) <= sigma R} phi lambda_min never drops below its value at t = 0."""
    baseline, _ = _weighted_lambda_inf(traj.snapshots[0], p)
    worst, where = np.inf, {}
    for snap in traj.snapshots:
        value, k = _weighted_lambda_inf(snap, p)
        if k is not None and value < worst:
            worst, where = value, {"t": snap.t, "node": _node_label(snap, k)}
    if not np.isfinite(baseline):
        # nothing below sigma R at t = 0: the statement is vacuous
        baseline, worst = 0.0, 0.0
    elif not np.isfinite(worst):
        worst = baseline
    return MonitorReport("lambda_min", baseline, worst,
                         config.LAMBDA_MIN_MONITOR_RTOL * abs(baseline), where)


def speed_bound_constant(beta: float, theta: float, Lam: float, R: float) -> float:
    """C0 = 2^(1 + 1/(2 beta)) (2 beta Lam (1 + 4 beta (theta + 1)) + R^2 + 2 (beta - 1) R)."""
    return 2.0 ** (1.0 + 1.0 / (2.0 * beta)) * (
        2.0 * beta * Lam * (1.0 + 4.0 * beta * (theta + 1.0)) + R ** 2 + 2.0 * (beta - 1.0) * R)


def monitor_speed_bound(traj: Trajectory, R: float) -> MonitorReport:
    """(t / (1 + t)) F phi^2 <= C0 theta^(1 + 1/(2 beta)) with theta, Lam taken from the run."""
    beta = traj.config.spec.beta
    theta, Lam = 0.0, 0.0
    for snap in traj.snapshots:
        region = snap.nodes["u"] <= R
        if np.any(region):
            theta = max(theta, float(np.max(snap.nodes["v"][region] ** 2)))
            Lam = max(Lam, float(np.max(1.0 / snap.nodes["lambda_min"][region])))
    C0 = speed_bound_constant(beta, theta, Lam, R)
    rhs = C0 * theta ** (1.0 + 1.0 / (2.0 * beta))
    lhs, where = 0.0, {"t": traj.snapshots[0].t}
    for snap in traj.snapshots:
        phi = np.maximum(R - snap.nodes["u"], 0.0)
        value = snap.t / (1.0 + snap.t) * snap.nodes["F"] * phi ** 2
        k = int(np.argmax(value))
        if value[k] > lhs:
            lhs, where = float(value[k]), {"t": snap.t, "node": _node_label(snap, k)}
    return MonitorReport("speed", lhs, rhs, config.SPEED_MONITOR_RTOL * abs(rhs), where,
                         {"theta": theta, "Lambda": Lam, "C0": C0})


def _sphere_clearance(snap: Snapshot, r: float, center: np.ndarray) -> np.ndarray:
    grid = snap.state.grid
    x = grid.coords()[grid.active]
    w = snap.state.w[grid.active]
    d2 = np.sum((x - center[:-1]) ** 2, axis=-1)
    inside = d2 < r ** 2
    return center[-1] - np.sqrt(r ** 2 - d2[inside]) - w[inside]


def comparison_check(traj: Trajectory, r0: float, center) -> MonitorReport:
    """Lower cap of the shrinking sphere about ``center`` stays on or above the graph.

    Clearance is sphere-cap height minus graph height over nodes under the
    sphere; snapshots at or past the sphere's extinction are skipped.
    """
    center = np.asarray(center, dtype=float)
    beta = traj.config.spec.beta
    T = extinction_time(r0, beta)
    first = _sphere_clearance(traj.snapshots[0], r0, center)
    if first.size and np.min(first) < -config.COMPARISON_TOL:
        raise NotEnclosedInitially("sphere is not enclosed by the initial graph",
                                   r0=r0, clearance=float(np.min(first)))
    worst, where = np.inf, {}
    for snap in traj.snapshots:
        if snap.t >= T:
            break
        clearance = _sphere_clearance(snap, sphere_radius(r0, beta, snap.t), center)
        if clearance.size and np.min(clearance) < worst:
            worst, where = float(np.min(clearance)), {"t": snap.t}
    if not np.isfinite(worst):
        worst = 0.0
    return MonitorReport("comparison", 0.0, worst, config.COMPARISON_TOL, where)


def sphere_evolution_identities(r0: float, beta: float, spec: CurvatureSpec, sample_points: int,
                                seed: int = config.DEFAULT_SEED) -> Dict[str, np.ndarray]:
    """Residuals of the height and gradient-function evolution equations on the exact sphere.

    Points are sampled on the lower hemisphere at least 0.1 r away from the
    equator and at times up to 0.9 of the extinction time. The operator
    L = beta F^(beta-1) f^i nabla_i nabla_i uses the curvature function's own
    derivatives at the umbilic point (1/r, ..., 1/r).
    """
    spec = spec.with_beta(beta)
    n = spec.n
    fn = function_for(spec)
    rng = np.random.default_rng(seed)
    T = extinction_time(r0, beta)
    times = 0.9 * T * rng.random(sample_points)
    # cosine of the polar angle from the south pole, bounded away from the equator
    omega = -(0.1 + 0.9 * rng.random(sample_points))
    height = np.empty(sample_points)
    gradient = np.empty(sample_points)
    for k, (t, om) in enumerate(zip(times, omega)):
        r = sphere_radius(r0, beta, t)
        lam = np.full(n, 1.0 / r)
        F = float(fn.value(lam))
        coeff = beta * F ** (beta - 1.0) * fn.gradient(lam)
        Phi = F ** beta
        u = r * om
        v = -1.0 / om
        drdt = -r ** (-beta)
        # tangential gradient of the height sits along the first frame direction
        grad_u = np.zeros(n)
        grad_u[0] = np.sqrt(1.0 - om ** 2)
        hess_u = np.full(n, -u / r ** 2)
        dt_u = drdt * om
        L_u = float(np.sum(coeff * hess_u))
        height[k] = dt_u - (L_u + (1.0 - beta) * Phi / v)
        grad_v = (r / u ** 2) * grad_u
        hess_v = r * (-2.0 * u ** -3 * grad_u ** 2 + u ** -2 * hess_u)
        L_v = float(np.sum(coeff * hess_v))
        grad_v_sq = float(np.sum(coeff * grad_v ** 2))
        h_sq = float(np.sum(coeff)) / r ** 2
        dt_v = 0.0
        gradient[k] = dt_v - (L_v - 2.0 / v * grad_v_sq - v * h_sq)
    return {"height": height, "gradient": gradient}


@dataclass
class Monitor:
    """A named monitor bound to its parameters; callable on a Trajectory."""
    name: str
    fn: Callable[..., MonitorReport]
    params: Dict[str, object] = field(default_factory=dict)

    def __call__(self, traj: Trajectory) -> MonitorReport:
        return self.fn(traj, **self.params)


def _gradient(traj, R, gamma, sigma=0.5):
    return monitor_gradient_estimate(traj, CutoffParams(R, gamma, sigma))


def _lambda(traj, R, gamma=None, sigma=0.5):
    return monitor_lambda_min(traj, CutoffParams(R, R if gamma is None else gamma, sigma))


def _speed(traj, R):
    return monitor_speed_bound(traj, R)


def _comparison(traj, r0, center):
    return comparison_check(traj, r0, center)


MONITOR_REGISTRY: Dict[str, Callable[..., MonitorReport]] = {
    "gradient": _gradient,
    "lambda_min": _lambda,
    "speed": _speed,
    "comparison": _comparison,
}

MONITOR_PARAMETERS = {
    "gradient": ({"R", "gamma"}, {"sigma"}),
    "lambda_min": ({"R"}, {"gamma", "sigma"}),
    "speed": ({"R"}, set()),
    "comparison": ({"r0", "center"}, set()),
}


def monitor_errors(name: str, params: Dict[str, object], path: str) -> list:
    """Validation errors for one monitor entry of a run configuration."""
    if name not in MONITOR_REGISTRY:
        return [(f"{path}.name", f"unknown monitor '{name}'; choose from {sorted(MONITOR_REGISTRY)}")]
    required, optional = MONITOR_PARAMETERS[name]
    errors = [(f"{path}.{key}", "missing parameter") for key in sorted(required - set(params))]
    errors += [(f"{path}.{key}", "unknown parameter") for key in sorted(set(params) - required - optional)]
    return errors


def build_monitor(name: str, **params) -> Monitor:
    errors = monitor_errors(name, params, "monitor")
    if errors:
        raise ValidationError(errors)
    return Monitor(name, MONITOR_REGISTRY[name], dict(params))


def run_monitors(traj: Trajectory, monitors: Sequence[Monitor]) -> Dict[str, MonitorReport]:
    reports = {m.name: m(traj) for m in monitors}
    for report in reports.values():
        level = logging.INFO if report.passed else logging.WARNING
        logger.log(level, "monitor %s: margin %.6g (%s)", report.name, report.margin,
                   "pass" if report.passed else "FAIL")
    return reports
