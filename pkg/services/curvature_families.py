from math import comb
from typing import List, Sequence, Tuple

import numpy as np

from models.curvature_spec import (
    CurvatureSpec, ElemSymRootFamily, Family, GaussPowerFamily,
    PowerMeanFamily, WeightedProductFamily,
)
from .curvature_function import CurvatureFunction


class PowerMean(CurvatureFunction):
    """(mean of lambda_i^r)^(1/r), r > 0; r = 1 is the arithmetic mean."""

    def __init__(self, n: int, r: float = 1.0):
        super().__init__(n)
        self.r = float(r)

    def value(self, lam):
        if self.r == 1.0:
            return np.mean(lam, axis=-1)
        return np.mean(lam ** self.r, axis=-1) ** (1.0 / self.r)

    def gradient(self, lam):
        if self.r == 1.0:
            return np.full(lam.shape, 1.0 / self.n)
        f = self.value(lam)[..., None]
        return f ** (1.0 - self.r) * lam ** (self.r - 1.0) / self.n

    def hessian(self, lam):
        shape = lam.shape + (self.n,)
        if self.r == 1.0:
            return np.zeros(shape)
        r, n = self.r, self.n
        f = self.value(lam)[..., None, None]
        p = lam ** (r - 1.0)
        outer = p[..., :, None] * p[..., None, :] / n
        diag = np.zeros(shape)
        idx = np.arange(n)
        diag[..., idx, idx] = lam ** (r - 2.0)
        return (1.0 - r) / n * f ** (1.0 - 2.0 * r) * (outer - f ** r * diag)

    def describe(self):
        return "mean" if self.r == 1.0 else f"power({self.r:g})"


def elementary_symmetric(lam: np.ndarray, k: int) -> np.ndarray:
    """E_k over the last axis; E_0 = 1 and E_k = 0 for k outside 0..n."""
    n = lam.shape[-1]
    if k < 0 or k > n:
        return np.zeros(lam.shape[:-1])
    e = [np.ones(lam.shape[:-1])] + [np.zeros(lam.shape[:-1]) for _ in range(k)]
    for i in range(n):
        li = lam[..., i]
        for j in range(k, 0, -1):
            e[j] = e[j] + li * e[j - 1]
    return e[k]


class ElemSymRoot(CurvatureFunction):
    """(E_k / C(n, k))^(1/k)."""

    def __init__(self, n: int, k: int = 1):
        super().__init__(n)
        self.k = int(k)
        self._norm = float(comb(n, self.k))

    def value(self, lam):
        return (elementary_symmetric(lam, self.k) / self._norm) ** (1.0 / self.k)

    def _dE(self, lam):
        cols = [elementary_symmetric(np.delete(lam, i, axis=-1), self.k - 1)
                for i in range(self.n)]
        return np.stack(cols, axis=-1)

    def _ddE(self, lam):
        out = np.zeros(lam.shape + (self.n,))
        for i in range(self.n):
            for j in range(i + 1, self.n):
                e = elementary_symmetric(np.delete(lam, [i, j], axis=-1), self.k - 2)
                out[..., i, j] = e
                out[..., j, i] = e
        return out

    def gradient(self, lam):
        k = self.k
        f = self.value(lam)[..., None]
        return f ** (1.0 - k) * self._dE(lam) / (k * self._norm)

    def hessian(self, lam):
        k = self.k
        f = self.value(lam)[..., None, None]
        dE = self._dE(lam) / self._norm
        ddE = self._ddE(lam) / self._norm
        outer = dE[..., :, None] * dE[..., None, :]
        return (f ** (1.0 - k) * ddE + (1.0 - k) / k * f ** (1.0 - 2.0 * k) * outer) / k

    def describe(self):
        return f"esym({self.k})"


class GaussPower(CurvatureFunction):
    """K^(1/n), the normalized n-th root of the Gauss curvature."""

    def value(self, lam):
        return np.exp(np.mean(np.log(lam), axis=-1))

    def gradient(self, lam):
        f = self.value(lam)[..., None]
        return f / (self.n * lam)

    def hessian(self, lam):
        n = self.n
        f = self.value(lam)[..., None, None]
        inv = 1.0 / lam
        outer = inv[..., :, None] * inv[..., None, :]
        diag = np.zeros(lam.shape + (n,))
        idx = np.arange(n)
        diag[..., idx, idx] = inv ** 2
        return f * (outer / n ** 2 - diag / n)

    def describe(self):
        return "gauss"


class WeightedProduct(CurvatureFunction):
    """prod_j G_j^{w_j} with weights in [0, 1] summing to one."""

    def __init__(self, n: int, factors: Sequence[Tuple[CurvatureFunction, float]]):
        super().__init__(n)
        self.factors: List[Tuple[CurvatureFunction, float]] = [(g, float(w)) for g, w in factors]

    def value(self, lam):
        log_f = sum(w * np.log(g.value(lam)) for g, w in self.factors if w > 0.0)
        return np.exp(log_f) * np.ones(lam.shape[:-1])

    def _log_gradient(self, lam):
        out = np.zeros(lam.shape)
        for g, w in self.factors:
            if w > 0.0:
                out = out + w * g.gradient(lam) / g.value(lam)[..., None]
        return out

    def gradient(self, lam):
        return self.value(lam)[..., None] * self._log_gradient(lam)

    def hessian(self, lam):
        f = self.value(lam)[..., None, None]
        lg = self._log_gradient(lam)
        acc = lg[..., :, None] * lg[..., None, :]
        for g, w in self.factors:
            if w > 0.0:
                gv = g.value(lam)[..., None, None]
                gg = g.gradient(lam)
                acc = acc + w * (g.hessian(lam) / gv
                                 - gg[..., :, None] * gg[..., None, :] / gv ** 2)
        return f * acc

    def describe(self):
        parts = ", ".join(f"{g.describe()}^{w:g}" for g, w in self.factors)
        return f"product({parts})"


def build_function(family: Family, n: int) -> CurvatureFunction:
    """Instantiate the function object for a family tree."""
    if isinstance(family, PowerMeanFamily):
        return PowerMean(n, family.r)
    if isinstance(family, ElemSymRootFamily):
        return ElemSymRoot(n, family.k)
    if isinstance(family, GaussPowerFamily):
        return GaussPower(n)
    if isinstance(family, WeightedProductFamily):
        return WeightedProduct(n, [(build_function(sub, n), w) for sub, w in family.factors])
    raise TypeError(f"unknown curvature family {family!r}")


def function_for(spec: CurvatureSpec) -> CurvatureFunction:
    return build_function(spec.family, spec.n)


def builtin_zoo(n: int, beta: float = 1.0) -> List[CurvatureSpec]:
    """Built-in curvature functions, all admissible in dimension n."""
    specs = [CurvatureSpec(PowerMeanFamily(r), n, beta) for r in (0.5, 1.0, 2.0)]
    specs += [CurvatureSpec(ElemSymRootFamily(k), n, beta) for k in range(1, n + 1)]
    specs.append(CurvatureSpec(GaussPowerFamily(), n, beta))
    for s in (0.25, 0.5, 0.75):
        specs.append(CurvatureSpec(
            WeightedProductFamily(((GaussPowerFamily(), s), (PowerMeanFamily(1.0), 1.0 - s))),
            n, beta))
    return specs
