from abc import ABC, abstractmethod

import numpy as np


class CurvatureFunction(ABC):
    """Abstract base class for symmetric curvature functions f on the positive cone.

    All methods take arrays of shape ``(..., n)`` and broadcast over the
    leading axes, so one call evaluates every grid node at once.
    """

    def __init__(self, n: int):
        self.n = n

    @abstractmethod
    def value(self, lam: np.ndarray) -> np.ndarray:
        """f(lambda), shape (...)."""
        pass

    @abstractmethod
    def gradient(self, lam: np.ndarray) -> np.ndarray:
        """First derivatives, shape (..., n)."""
        pass

    @abstractmethod
    def hessian(self, lam: np.ndarray) -> np.ndarray:
        """Second derivatives, shape (..., n, n)."""
        pass

    @abstractmethod
    def describe(self) -> str:
        """Expression-grammar form of this function."""
        pass

    def dual_value(self, tau: np.ndarray) -> np.ndarray:
        """f_*(tau) = 1 / f(1/tau)."""
        return 1.0 / self.value(1.0 / tau)

    def dual_gradient(self, tau: np.ndarray) -> np.ndarray:
        mu = 1.0 / tau
        f = self.value(mu)[..., None]
        return self.gradient(mu) * mu ** 2 / f ** 2

    def dual_hessian(self, tau: np.ndarray) -> np.ndarray:
        mu = 1.0 / tau
        f = self.value(mu)[..., None, None]
        df = self.gradient(mu)
        ddf = self.hessian(mu)
        mu2 = mu ** 2
        outer_mu2 = mu2[..., :, None] * mu2[..., None, :]
        outer_df = df[..., :, None] * df[..., None, :]
        diag = np.zeros_like(ddf)
        idx = np.arange(self.n)
        diag[..., idx, idx] = 2.0 * df * mu ** 3 / f[..., 0]
        return (2.0 * outer_df * outer_mu2 / f ** 3
                - ddf * outer_mu2 / f ** 2
                - diag / f)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.describe()}, n={self.n})"
