"""Discrete differential geometry of graphs over a uniform grid."""

import logging
from typing import Tuple

import numpy as np
import scipy.linalg

from app import config
from models.curvature_spec import CurvatureSpec, Lambda
from models.errors import DomainError, NonConvexState, SingularInput
from models.graph_state import GeomFields, GraphState, RotationalProfile
from utils.parallel import map_rows
from .curvature_families import function_for

logger = logging.getLogger(__name__)


def _shifted(padded: np.ndarray, offset: Tuple[int, ...], shape: Tuple[int, ...]) -> np.ndarray:
    sl = tuple(slice(1 + o, 1 + o + m) for o, m in zip(offset, shape))
    return padded[sl]


def _unit(n: int, d: int, sign: int = 1) -> Tuple[int, ...]:
    return tuple(sign if k == d else 0 for k in range(n))


def differentiate(state: GraphState) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Second-order central differences at interior nodes.

    Returns ``(index, Dw, D2w)`` with shapes (N, n), (N, n), (N, n, n).
    Boundary nodes only feed stencils; they are never differentiated.
    """
    grid = state.grid
    n, dx, shape = grid.n, grid.spacing, grid.shape
    interior = grid.interior
    w = np.where(grid.active, state.w, np.nan)
    padded = np.pad(w, 1, constant_values=np.nan)
    centre = w[interior]
    count = centre.shape[0]
    Dw = np.empty((count, n))
    D2w = np.empty((count, n, n))
    for d in range(n):
        plus = _shifted(padded, _unit(n, d, 1), shape)[interior]
        minus = _shifted(padded, _unit(n, d, -1), shape)[interior]
        Dw[:, d] = (plus - minus) / (2.0 * dx)
        D2w[:, d, d] = (plus - 2.0 * centre + minus) / dx ** 2
    for a in range(n):
        for b in range(a + 1, n):
            def corner(sa, sb):
                off = tuple(sa if k == a else sb if k == b else 0 for k in range(n))
                return _shifted(padded, off, shape)[interior]
            cross = (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4.0 * dx ** 2)
            D2w[:, a, b] = cross
            D2w[:, b, a] = cross
    index = np.argwhere(interior)
    return index, Dw, D2w


def metric(Dw: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """g = I + Dw Dw^T, its inverse and the gradient function v."""
    n = Dw.shape[-1]
    q = np.sum(Dw ** 2, axis=-1)
    outer = Dw[..., :, None] * Dw[..., None, :]
    eye = np.eye(n)
    g = eye + outer
    g_inv = eye - outer / (1.0 + q)[..., None, None]
    v = np.sqrt(1.0 + q)
    return g, g_inv, v


def shape_operator_explicit(Dw: np.ndarray, D2w: np.ndarray) -> np.ndarray:
    """h^i_j = w_jk / v * (delta^ik - w^i w^k / v^2)."""
    n = Dw.shape[-1]
    q = 1.0 + np.sum(Dw ** 2, axis=-1)
    proj = np.eye(n) - Dw[..., :, None] * Dw[..., None, :] / q[..., None, None]
    return np.einsum("...ik,...kj->...ij", proj, D2w) / np.sqrt(q)[..., None, None]


def generalized_eigenvalues(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Eigenvalues of h x = lambda g x, ascending, via the Cholesky factor of g."""
    def block(hb, gb):
        L = np.linalg.cholesky(gb)
        X = np.linalg.solve(L, hb)
        A = np.linalg.solve(L, np.swapaxes(X, -1, -2))
        A = 0.5 * (A + np.swapaxes(A, -1, -2))
        return (np.linalg.eigvalsh(A),)
    return map_rows(block, h, g)[0]


def geom_fields(state: GraphState, spec: CurvatureSpec,
                lambda_floor: float = config.LAMBDA_FLOOR) -> GeomFields:
    """Metric, normal, second fundamental form, principal curvatures and speed at interior nodes."""
    index, Dw, D2w = differentiate(state)
    g, g_inv, v = metric(Dw)
    h = D2w / v[:, None, None]
    lam = generalized_eigenvalues(h, g)
    if lam.size and np.min(lam[:, 0]) < lambda_floor:
        k = int(np.argmin(lam[:, 0]))
        raise NonConvexState("state is not strictly convex",
                             t=state.t, node=str(tuple(index[k])), lambda_min=float(lam[k, 0]))
    fn = function_for(spec)
    F = fn.value(lam)
    grad_f = fn.gradient(lam)
    nu = np.concatenate([Dw, -np.ones((Dw.shape[0], 1))], axis=1) / v[:, None]
    x = state.grid.coords()[state.grid.interior]
    return GeomFields(index=index, x=x, w=state.w[state.grid.interior], Dw=Dw, D2w=D2w,
                      g=g, g_inv=g_inv, h=h, lam=lam, v=v, nu=nu, F=F, Phi=F ** spec.beta,
                      grad_f=grad_f)


def inverse_second_fundamental_form(fields: GeomFields) -> np.ndarray:
    """b^{ij}, the inverse of h_ij at every interior node."""
    return np.linalg.inv(fields.h)


def euler_bound_check(g: np.ndarray, h: np.ndarray) -> float:
    """min_i (1/lambda_min - b^ii / g^ii) with b the inverse of h."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.linalg.cond(h) > 1.0 / config.SINGULAR_RCOND:
        raise SingularInput("second fundamental form is not invertible",
                            condition=float(np.linalg.cond(h)))
    b = np.linalg.inv(h)
    g_inv = np.linalg.inv(g)
    lam_min = float(scipy.linalg.eigh(h, g, eigvals_only=True)[0])
    ratios = np.diag(b) / np.diag(g_inv)
    return float(np.min(1.0 / lam_min - ratios))


def rotational_curvature_arrays(profile: RotationalProfile, r) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized K, H and principal curvatures (radial last) of a rotational graph."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise DomainError("radius must be positive", r=float(np.min(r)))
    n = profile.n
    _, p1, p2 = profile.evaluate(r)
    s = 1.0 + p1 ** 2
    K = p2 * np.abs(p1) ** (n - 1) / (r ** (n - 1) * s ** ((n + 2) / 2.0))
    H = ((n - 1) * p1 / r + p2 / s) / np.sqrt(s)
    tangential = p1 / (r * np.sqrt(s))
    radial = p2 / s ** 1.5
    lam = np.concatenate([np.repeat(tangential[..., None], n - 1, axis=-1), radial[..., None]], axis=-1)
    return K, H, lam


def rotational_curvatures(profile: RotationalProfile, r: float) -> Tuple[float, float, Lambda]:
    K, H, lam = rotational_curvature_arrays(profile, float(r))
    return float(K), float(H), Lambda(tuple(np.atleast_1d(lam)))


def sphere_profile(r0: float, n: int, center_height: float = 0.0) -> RotationalProfile:
    """Lower hemisphere c - sqrt(r0^2 - r^2) as a rotational profile."""
    def inverse(r):
        root = np.sqrt(r0 ** 2 - r ** 2)
        return center_height - root, r / root, r0 ** 2 / root ** 3
    return RotationalProfile(inverse, n, name="sphere")


def validate_initial_graph(state: GraphState, spec: CurvatureSpec,
                           lambda_floor: float = config.LAMBDA_FLOOR) -> dict:
    """Discrete checks of the graph structure of complete convex hypersurfaces.

    Strict convexity raises NonConvexState; the other findings are reported.
    """
    fields = geom_fields(state, spec, lambda_floor)
    grid = state.grid
    active_w = np.where(grid.active, state.w, np.inf)
    flat = int(np.argmin(active_w))
    at = np.unravel_index(flat, grid.shape)
    report = {
        "strictly_convex": True,
        "min_w": float(active_w[at]),
        "min_attained_inside": bool(grid.interior[at]),
        "min_nonnegative": bool(active_w[at] >= 0.0),
        "min_lambda_min": float(np.min(fields.lambda_min)),
        "max_v": float(np.max(fields.v)),
    }
    if not report["min_attained_inside"]:
        logger.warning("initial graph attains its minimum on the grid boundary at %s", at)
    return report
