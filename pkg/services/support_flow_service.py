"""Closed plane curves moving by a power of curvature, in support-function form.

The curve is stored as samples of its support function S on a uniform circle
grid; it evolves by dS/dt = -kappa^beta with kappa = 1 / (S_thth + S).
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.ndimage import convolve1d

from app import config
from models.errors import EmptySublevel, NonConvexCurve
from models.flow_types import SupportCurve, SupportTrajectory

logger = logging.getLogger(__name__)

# directions per block in the brute-force support evaluation
_DIRECTION_BLOCK = 64


def _checked_radius(curve: SupportCurve) -> np.ndarray:
    rho = curve.radius_of_curvature()
    if np.min(rho) <= 0.0:
        k = int(np.argmin(rho))
        raise NonConvexCurve("support curve lost strict convexity",
                             t=curve.t, node=k, radius=float(rho[k]))
    return rho


def support_speed(curve: SupportCurve) -> np.ndarray:
    return -(1.0 / _checked_radius(curve)) ** curve.beta


def support_cfl_dt(curve: SupportCurve, safety: float = config.DEFAULT_SAFETY) -> float:
    """safety * dtheta^2 / (2 max beta kappa^(beta+1))."""
    kappa = 1.0 / _checked_radius(curve)
    return float(safety * curve.dtheta ** 2 / (2.0 * curve.beta * np.max(kappa) ** (curve.beta + 1.0)))


def support_flow_step(curve: SupportCurve, dt: float) -> SupportCurve:
    """One explicit midpoint step; convexity is re-checked at both stages."""
    k1 = support_speed(curve)
    half = curve.copy(S=curve.S + 0.5 * dt * k1, t=curve.t + 0.5 * dt)
    k2 = support_speed(half)
    new = curve.copy(S=curve.S + dt * k2, t=curve.t + dt)
    _checked_radius(new)
    return new


def mean_radius(curve: SupportCurve) -> float:
    """Mean of S over the circle, i.e. perimeter / 2pi; independent of the origin."""
    return float(np.mean(curve.S))


def run_support_flow(curve: SupportCurve, t_end: Optional[float] = None,
                     safety: float = config.DEFAULT_SAFETY,
                     collapse_fraction: float = config.COLLAPSE_FRACTION,
                     snapshot_every: int = config.DEFAULT_SNAPSHOT_EVERY) -> SupportTrajectory:
    """Flow until ``t_end`` or until the curve collapses.

    Collapse means the mean support radius dropped below ``collapse_fraction``
    of its initial value; the time at which that happens is the numerical
    collapse time. Without ``t_end`` the run continues until collapse.
    """
    traj = SupportTrajectory(curves=[curve.copy()])
    start = mean_radius(curve)
    current = curve
    while t_end is None or current.t < t_end * (1.0 - 1e-12):
        if traj.steps >= config.MAX_STEPS:
            logger.warning("support flow hit the step limit at t=%.6g", current.t)
            break
        dt = support_cfl_dt(current, safety)
        if t_end is not None:
            dt = min(dt, t_end - current.t)
        current = support_flow_step(current, dt)
        traj.steps += 1
        if mean_radius(current) < collapse_fraction * start:
            traj.collapse_time = current.t
            traj.curves.append(current)
            logger.info("support curve collapsed at t=%.6g after %d steps", current.t, traj.steps)
            break
        if traj.steps % snapshot_every == 0:
            traj.curves.append(current)
    if traj.curves[-1] is not current:
        traj.curves.append(current)
    return traj


def support_to_points(curve: SupportCurve, origin: Optional[Tuple[float, float]] = None) -> np.ndarray:
    """Boundary points X(theta) = S z + S_theta z_perp, shape (m, 2)."""
    ox, oy = curve.origin if origin is None else origin
    theta = curve.theta
    dS = (np.roll(curve.S, -1) - np.roll(curve.S, 1)) / (2.0 * curve.dtheta)
    z = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    z_perp = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
    return np.array([ox, oy]) + curve.S[:, None] * z + dS[:, None] * z_perp


def lower_half(curve: SupportCurve) -> np.ndarray:
    """Points whose outward normal points downward, sorted by x: the graph part."""
    points = support_to_points(curve)
    below = np.sin(curve.theta) < 0.0
    part = points[below]
    return part[np.argsort(part[:, 0], kind="stable")]


def support_of_points(points: np.ndarray, m: int, origin: Tuple[float, float]) -> np.ndarray:
    """S(theta) = max <p - origin, (cos theta, sin theta)> by brute force over the points."""
    rel = np.asarray(points, dtype=float) - np.asarray(origin)
    theta = 2.0 * np.pi * np.arange(m) / m
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    S = np.empty(m)
    for lo in range(0, m, _DIRECTION_BLOCK):
        S[lo:lo + _DIRECTION_BLOCK] = np.max(dirs[lo:lo + _DIRECTION_BLOCK] @ rel.T, axis=1)
    return S


def double_and_envelope(x: np.ndarray, w0: np.ndarray, level: float, eps: float, m: int,
                        beta: float = 1.0) -> SupportCurve:
    """Reflect the graph of w0 truncated at ``level`` across the level line and take the eps-envelope.

    The support function is measured from (x_mid, level), so the result is
    symmetric under theta -> -theta.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    x = np.asarray(x, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    below = w0 <= level
    if not np.any(below):
        raise EmptySublevel("profile lies above the level everywhere", level=level,
                            min_w=float(np.min(w0)))
    points = [np.stack([x[below], w0[below]], axis=-1)]
    # level crossings between consecutive samples close the truncated arc
    d = w0 - level
    cross = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
    if cross.size:
        frac = d[cross] / (d[cross] - d[cross + 1])
        xc = x[cross] + frac * (x[cross + 1] - x[cross])
        points.append(np.stack([xc, np.full_like(xc, level)], axis=-1))
    lower = np.concatenate(points, axis=0)
    upper = np.stack([lower[:, 0], 2.0 * level - lower[:, 1]], axis=-1)
    body = np.concatenate([lower, upper], axis=0)
    origin = (0.5 * (float(np.min(lower[:, 0])) + float(np.max(lower[:, 0]))), float(level))
    S = support_of_points(body, m, origin)
    # exact reflection symmetry S(theta) = S(-theta)
    S = 0.5 * (S + np.roll(S[::-1], 1))
    curve = SupportCurve(S + eps, t=0.0, beta=beta, origin=origin)
    _checked_radius(curve)
    return curve


def approximating_graph(x: np.ndarray, w0: np.ndarray, i: int, m: int,
                        beta: float = 1.0) -> SupportCurve:
    """i-th closed approximant: w0 + 2/i doubled at level i with its 1/i-envelope."""
    if i < 1:
        raise ValueError("approximation index must be >= 1")
    return double_and_envelope(x, np.asarray(w0, dtype=float) + 2.0 / i, float(i), 1.0 / i, m, beta)


def _bump(width: float, dtheta: float) -> np.ndarray:
    half = int(np.floor(width / dtheta))
    s = dtheta * np.arange(-half, half + 1) / width
    inner = np.abs(s) < 1.0
    weights = np.zeros_like(s)
    weights[inner] = np.exp(-1.0 / (1.0 - s[inner] ** 2))
    return weights / np.sum(weights)


def mollify_support(curve: SupportCurve, width: float) -> SupportCurve:
    """Circular convolution of S with a smooth compactly supported bump of half-width ``width``.

    Convolution commutes with S_thth + S, so positive radii stay positive.
    """
    if width <= 0.0:
        raise ValueError("mollifier width must be positive")
    weights = _bump(width, curve.dtheta)
    if weights.size < 3:
        return curve.copy()
    return curve.copy(S=convolve1d(curve.S, weights, mode="wrap"))
