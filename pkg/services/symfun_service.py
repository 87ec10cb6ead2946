"""Evaluation, differentiation, dualization and certification of curvature functions."""

import logging
from typing import Tuple, Union

import numpy as np

from app import config
from models.curvature_spec import (
    CertEntry, CertReport, CurvatureSpec, DerivativeBundle, ElemSymRootFamily,
    Lambda, WeightedProductFamily,
)
from models.errors import AsymmetricDirection, DimensionMismatch, DomainError
from .curvature_families import function_for

logger = logging.getLogger(__name__)

LambdaLike = Union[Lambda, np.ndarray]


def _as_array(spec: CurvatureSpec, lam: LambdaLike) -> np.ndarray:
    arr = lam.as_array() if isinstance(lam, Lambda) else np.asarray(lam, dtype=float)
    if arr.shape[-1] != spec.n:
        raise DimensionMismatch(f"spec has n={spec.n} but input has {arr.shape[-1]} entries",
                                expected=spec.n, got=arr.shape[-1])
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("input must lie in the positive cone", minimum=float(np.min(arr)))
    return arr


def eval_f(spec: CurvatureSpec, lam: LambdaLike) -> float:
    """f(lambda) for one point of the positive cone."""
    return float(function_for(spec).value(_as_array(spec, lam)))


def derivatives(spec: CurvatureSpec, lam: LambdaLike) -> DerivativeBundle:
    arr = _as_array(spec, lam)
    fn = function_for(spec)
    return DerivativeBundle(value=float(fn.value(arr)), grad=fn.gradient(arr), hess=fn.hessian(arr))


def eval_dual(spec: CurvatureSpec, tau: LambdaLike) -> float:
    """f_*(tau) = f(1/tau_1, ..., 1/tau_n)^(-1)."""
    return float(function_for(spec).dual_value(_as_array(spec, tau)))


def dual_derivatives(spec: CurvatureSpec, tau: LambdaLike) -> DerivativeBundle:
    arr = _as_array(spec, tau)
    fn = function_for(spec)
    return DerivativeBundle(value=float(fn.dual_value(arr)), grad=fn.dual_gradient(arr),
                            hess=fn.dual_hessian(arr))


def eval_F_matrix(spec: CurvatureSpec, A: np.ndarray) -> float:
    """F(A) = f(eigenvalues of the symmetric matrix A)."""
    A = np.asarray(A, dtype=float)
    return eval_f(spec, np.linalg.eigvalsh(0.5 * (A + A.T)))


def pair_quotients(grad: np.ndarray, hess: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """(f^i - f^k)/(lambda_i - lambda_k), with the symmetric limit f^ii - f^ik on near ties."""
    n = lam.shape[-1]
    scale = np.max(lam, axis=-1)[..., None, None]
    dl = lam[..., :, None] - lam[..., None, :]
    dg = grad[..., :, None] - grad[..., None, :]
    tie = np.abs(dl) < config.EIGEN_TIE_RTOL * scale
    safe = np.where(tie, 1.0, dl)
    diag = np.diagonal(hess, axis1=-2, axis2=-1)
    limit = diag[..., :, None] - hess
    q = np.where(tie, limit, dg / safe)
    idx = np.arange(n)
    q[..., idx, idx] = 0.0
    return q


def ddF_direction(spec: CurvatureSpec, lam: Lambda, B: np.ndarray) -> float:
    """Second derivative of F at diag(lam) in the symmetric direction B.

    B is indexed in the ascending order of ``lam``.
    """
    arr = _as_array(spec, lam)
    B = np.asarray(B, dtype=float)
    if B.shape != (spec.n, spec.n):
        raise DimensionMismatch("direction must be n x n", expected=spec.n, got=str(B.shape))
    if np.max(np.abs(B - B.T), initial=0.0) > config.SYMMETRY_TOL:
        raise AsymmetricDirection("direction matrix is not symmetric",
                                  asymmetry=float(np.max(np.abs(B - B.T))))
    fn = function_for(spec)
    grad, hess = fn.gradient(arr), fn.hessian(arr)
    d = np.diag(B)
    diagonal_part = d @ hess @ d
    q = pair_quotients(grad, hess, arr)
    upper = np.triu_indices(spec.n, k=1)
    off_part = 2.0 * np.sum(q[upper] * B[upper] ** 2)
    return float(diagonal_part + off_part)


def verify_lemma2(spec: CurvatureSpec, lam: LambdaLike) -> Tuple[float, float]:
    """Residuals of the two inverse-concavity inequalities.

    residual_1 = sum f^i lambda_i^2 - f^2, residual_2 = min over k != l of
    (f^k - f^l)/(lambda_k - lambda_l) + f^k/lambda_l + f^l/lambda_k.
    With n = 1 there are no pairs and residual_2 is +inf.
    """
    arr = _as_array(spec, lam)
    fn = function_for(spec)
    f, grad, hess = fn.value(arr), fn.gradient(arr), fn.hessian(arr)
    residual1 = float(np.sum(grad * arr ** 2) - f ** 2)
    if spec.n == 1:
        return residual1, float("inf")
    q = pair_quotients(grad, hess, arr)
    pair = q + grad[:, None] / arr[None, :] + grad[None, :] / arr[:, None]
    off = ~np.eye(spec.n, dtype=bool)
    return residual1, float(np.min(pair[off]))


def sample_positive_cone(n: int, count: int, seed: int,
                         low: float = config.SAMPLE_LOG_LOW,
                         high: float = config.SAMPLE_LOG_HIGH) -> np.ndarray:
    """Log-uniform samples in [low, high]^n, deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    return np.exp(rng.uniform(np.log(low), np.log(high), size=(count, n)))


def _has_unproven_boundary_decay(spec: CurvatureSpec) -> bool:
    fam = spec.family
    stack = [fam]
    while stack:
        node = stack.pop()
        if isinstance(node, ElemSymRootFamily) and node.k < spec.n:
            return True
        if isinstance(node, WeightedProductFamily):
            stack.extend(sub for sub, _ in node.factors)
    return False


def check_condition1(spec: CurvatureSpec, sample_count: int, seed: int) -> CertReport:
    """Sampled certification of monotonicity, homogeneity, normalization,
    inverse concavity and boundary decay of the dual.

    Failures are report entries, never exceptions.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    n = spec.n
    fn = function_for(spec)
    lam = sample_positive_cone(n, sample_count, seed)
    report = CertReport(function=spec.describe(), n=n, sample_count=sample_count, seed=seed)

    f = fn.value(lam)
    grad = fn.gradient(lam)
    # (ii) scale-free positivity margin
    pos = float(np.min(grad / f[:, None]))
    report.entries.append(CertEntry("ii_monotone", pos, pos > 0.0))

    # (iii)
    worst = 0.0
    for k in config.HOMOGENEITY_FACTORS:
        rel = np.abs(fn.value(k * lam) - k * f) / (k * f)
        worst = max(worst, float(np.max(rel)))
    report.entries.append(CertEntry("iii_homogeneous", config.HOMOGENEITY_RTOL - worst,
                                    worst <= config.HOMOGENEITY_RTOL))

    # (iv)
    norm_err = abs(float(fn.value(np.ones(n))) - 1.0)
    report.entries.append(CertEntry("iv_normalized", config.NORMALIZATION_TOL - norm_err,
                                    norm_err <= config.NORMALIZATION_TOL))

    # (v) Hessian of f_* at tau / max(tau); f_* has degree 1, so its Hessian has degree -1 and keeps its sign
    tau = lam / np.max(lam, axis=-1, keepdims=True)
    max_eig = float(np.max(np.linalg.eigvalsh(fn.dual_hessian(tau))))
    report.entries.append(CertEntry("v_inverse_concave", config.CONCAVITY_EIG_TOL - max_eig,
                                    max_eig <= config.CONCAVITY_EIG_TOL, note="sampled"))

    # (vi) drive the smallest coordinate of each normalized sample to zero
    exponents = np.arange(2, max(12, 4 * n) + 1)
    path = np.repeat(tau[:, None, :], len(exponents), axis=1)
    rows = np.arange(sample_count)
    jmin = np.argmin(tau, axis=-1)
    path[rows, :, jmin] = np.minimum(tau[rows, jmin][:, None], 10.0 ** (-exponents)[None, :])
    dual_path = fn.dual_value(path)
    increments = np.diff(dual_path, axis=-1)
    monotone = float(np.max(increments)) <= config.DECAY_MONOTONE_TOL * float(np.max(dual_path))
    final = float(np.max(dual_path[:, -1]))
    note = "sampled only" if _has_unproven_boundary_decay(spec) else "sampled"
    report.entries.append(CertEntry("vi_dual_vanishes", config.DECAY_TARGET - final,
                                    monotone and final < config.DECAY_TARGET, note=note))

    # derived properties
    euler = float(np.max(np.abs(np.sum(grad * lam, axis=-1) - f) / f))
    report.entries.append(CertEntry("euler_relation", config.EULER_RTOL - euler,
                                    euler <= config.EULER_RTOL))
    res1 = np.sum(grad * lam ** 2, axis=-1) - f ** 2
    scale = np.max(lam, axis=-1) ** 2
    worst1 = float(np.min(res1 / scale))
    report.entries.append(CertEntry("trace_bound", worst1 + config.RESIDUAL_FLOOR,
                                    worst1 >= -config.RESIDUAL_FLOOR))
    if n > 1:
        hess = fn.hessian(lam)
        q = pair_quotients(grad, hess, lam)
        pair = q + grad[..., :, None] / lam[..., None, :] + grad[..., None, :] / lam[..., :, None]
        off = ~np.eye(n, dtype=bool)
        normalized = pair[:, off] * np.max(lam, axis=-1)[:, None]
        worst2 = float(np.min(normalized))
        report.entries.append(CertEntry("pair_bound", worst2 + config.RESIDUAL_FLOOR,
                                        worst2 >= -config.RESIDUAL_FLOOR))

    logger.info("admissibility check for %s (n=%d, %d samples): %s",
                spec.describe(), n, sample_count, "pass" if report.passed else "FAIL")
    return report
