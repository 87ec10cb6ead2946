"""Rotational barrier family and the sampled check that it is a supersolution."""

import logging
from typing import Dict

import numpy as np
from scipy.optimize import brentq

from app import config
from models.curvature_spec import GaussPowerFamily, PowerMeanFamily, product_spec
from models.errors import ConstraintViolated
from models.estimate_types import BarrierParams, MonitorReport
from models.graph_state import RotationalProfile
from .curvature_families import function_for
from .geometry_service import rotational_curvature_arrays

logger = logging.getLogger(__name__)


def barrier_coefficient(p: BarrierParams) -> float:
    """2^((1-s+s/n) beta + 2) (1-sigma)^-beta n^((1-s) beta) R0^-beta."""
    s, n, beta = p.s, p.n, p.beta
    return (2.0 ** ((1.0 - s + s / n) * beta + 2.0) * (1.0 - p.sigma) ** (-beta)
            * n ** ((1.0 - s) * beta) * p.R0 ** (-beta))


def constraint_lhs(p: BarrierParams) -> float:
    return p.delta + barrier_coefficient(p) * p.delta ** p.delta_exponent * p.t0


def check_constraint(p: BarrierParams) -> None:
    lhs = constraint_lhs(p)
    if lhs > p.sigma * p.R0:
        raise ConstraintViolated("delta is too large for the barrier time horizon",
                                 lhs=lhs, bound=p.sigma * p.R0, delta=p.delta, t0=p.t0)


def maximal_delta(R0: float, sigma: float, s: float, beta: float, n: int, t0: float) -> float:
    """Largest delta with delta + A delta^(s beta / n) t0 <= sigma R0."""
    probe = BarrierParams(R0, sigma, 1.0, s, beta, n, t0)
    A = barrier_coefficient(probe)
    q = probe.delta_exponent
    bound = sigma * R0

    def excess(delta):
        return delta + A * delta ** q * t0 - bound

    root = brentq(excess, 0.0, bound, xtol=1e-15, rtol=1e-14)
    while excess(root) > 0.0:
        root = np.nextafter(root, 0.0)
    return float(root)


def barrier_radius(p: BarrierParams, h, t):
    """phi(h, t) = R0 - delta (h - l)^2 - A delta^(s beta / n) t."""
    drift = barrier_coefficient(p) * p.delta ** p.delta_exponent
    return p.R0 - p.delta * (np.asarray(h) - p.l) ** 2 - drift * np.asarray(t)


def barrier_profile(p: BarrierParams, t: float) -> RotationalProfile:
    """Height as a function of radius for the lower branch h <= l at time t."""
    drift = barrier_coefficient(p) * p.delta ** p.delta_exponent

    def inverse(r):
        gap = np.sqrt((p.R0 - drift * t - r) / p.delta)
        h = p.l - gap
        slope = 1.0 / (2.0 * p.delta * gap)
        curvature = 2.0 * p.delta * slope ** 3
        return h, slope, curvature

    return RotationalProfile(inverse, p.n, name="barrier")


def barrier_bounds(p: BarrierParams) -> Dict[str, float]:
    """Right-hand constants of the curvature, mean curvature and speed bounds."""
    s, n = p.s, p.n
    F_hat = (2.0 ** (1.0 - s + s / n) * n ** (1.0 - s) / ((1.0 - p.sigma) * p.R0)
             * p.delta ** (s / n))
    return {
        "K": 2.0 * p.R0 ** (-n) * (1.0 - p.sigma) ** (-n) * p.delta,
        "H": 2.0 * n / ((1.0 - p.sigma) * p.R0),
        "F_hat": F_hat,
    }


def barrier_supersolution_check(p: BarrierParams, samples: int = config.DEFAULT_BARRIER_SAMPLES,
                                seed: int = config.DEFAULT_SEED) -> MonitorReport:
    """Sample (h, t) in [l-1, l) x [0, t0] and check the supersolution chain.

    (a) K bound, (b) H bound, (c) gradient-function bound, (d) barrier speed
    against F_hat^beta v, and (e) the actual speed K^(s/n) G^(1-s) with G the
    arithmetic mean of the principal curvatures. Margins are relative to the
    right-hand sides; the report margin is the smallest of them.
    """
    check_constraint(p)
    rng = np.random.default_rng(seed)
    top = 1.0 - config.BARRIER_TOP_BAND
    h = p.l - 1.0 + top * rng.random(samples)
    t = p.t0 * rng.random(samples)
    r = barrier_radius(p, h, t)
    bounds = barrier_bounds(p)
    drift = barrier_coefficient(p) * p.delta ** p.delta_exponent

    K, H, lam = rotational_curvature_arrays(barrier_profile(p, t), r)
    slope = 1.0 / (2.0 * p.delta * (p.l - h))
    v = np.sqrt(1.0 + slope ** 2)
    dt_height = drift / (2.0 * p.delta * (p.l - h))

    spec = product_spec(((GaussPowerFamily(), p.s), (PowerMeanFamily(1.0), 1.0 - p.s)), p.n, p.beta)
    F = function_for(spec).value(np.sort(lam, axis=-1))

    v_bound = 2.0 / (p.delta * (p.l - h))
    margins = {
        "curvature": np.min((bounds["K"] - K) / bounds["K"]),
        "mean_curvature": np.min((bounds["H"] - H) / bounds["H"]),
        "gradient": np.min((v_bound - v) / v_bound),
        "barrier_speed": np.min((dt_height - bounds["F_hat"] ** p.beta * v) / dt_height),
        "actual_speed": np.min((dt_height - F ** p.beta * v) / dt_height),
    }
    margins = {key: float(value) for key, value in margins.items()}
    worst = min(margins, key=margins.get)
    logger.info("barrier check s=%g beta=%g delta=%.6g: worst %s margin %.3g",
                p.s, p.beta, p.delta, worst, margins[worst])
    return MonitorReport("barrier", 0.0, margins[worst], 0.0,
                         {"worst_inequality": worst, "samples": samples, "seed": seed},
                         dict(margins, coefficient=barrier_coefficient(p),
                              constraint_lhs=constraint_lhs(p)))
