from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np


OUTSIDE = 0
BOUNDARY = 1
INTERIOR = 2


@dataclass
class GraphGrid:
    """Uniform isotropic grid over a rectangular index box with node masks."""
    n: int
    spacing: float
    mask: np.ndarray
    origin: Tuple[float, ...]

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=np.int8)
        self.origin = tuple(float(o) for o in self.origin)
        if self.n not in (1, 2) or self.mask.ndim != self.n:
            raise ValueError(f"gridded runs support n in (1, 2); mask has ndim {self.mask.ndim}")
        if self.spacing <= 0:
            raise ValueError("grid spacing must be positive")

    @classmethod
    def from_domain(cls, n: int, spacing: float, extent: float,
                    inside: Callable[[np.ndarray], np.ndarray]) -> "GraphGrid":
        """Grid over [-extent, extent]^n; ``inside`` maps coordinates (..., n) to a bool mask.

        A node is interior when its whole 3^n stencil lies inside the domain, which
        also gives the 2n axis neighbours the interior update needs.
        """
        m = int(round(2.0 * extent / spacing)) + 1
        origin = tuple([-extent] * n)
        axes = [origin[0] + spacing * np.arange(m)] * n
        coords = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        in_domain = np.asarray(inside(coords), dtype=bool)
        padded = np.pad(in_domain, 1, constant_values=False)
        full = np.ones_like(in_domain)
        for offset in np.ndindex(*([3] * n)):
            sl = tuple(slice(o, o + m) for o in offset)
            full &= padded[sl]
        mask = np.where(in_domain, BOUNDARY, OUTSIDE).astype(np.int8)
        mask[in_domain & full] = INTERIOR
        return cls(n=n, spacing=spacing, mask=mask, origin=origin)

    @classmethod
    def disk(cls, n: int, spacing: float, radius: float) -> "GraphGrid":
        tol = 1e-12 * radius
        return cls.from_domain(n, spacing, radius,
                               lambda x: np.sum(x ** 2, axis=-1) <= (radius + tol) ** 2)

    @classmethod
    def box(cls, n: int, spacing: float, extent: float) -> "GraphGrid":
        return cls.from_domain(n, spacing, extent, lambda x: np.ones(x.shape[:-1], dtype=bool))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.mask.shape

    def coords(self) -> np.ndarray:
        axes = [self.origin[d] + self.spacing * np.arange(self.shape[d]) for d in range(self.n)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    @property
    def interior(self) -> np.ndarray:
        return self.mask == INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return self.mask == BOUNDARY

    @property
    def active(self) -> np.ndarray:
        return self.mask != OUTSIDE

    def interior_count(self) -> int:
        return int(np.count_nonzero(self.interior))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "spacing": self.spacing,
            "shape": list(self.shape),
            "origin": list(self.origin),
            "interior_nodes": self.interior_count(),
            "boundary_nodes": int(np.count_nonzero(self.boundary)),
        }


@dataclass
class GraphState:
    """Discrete graph function w on a grid at time t (NaN outside the domain)."""
    grid: GraphGrid
    w: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if self.w.shape != self.grid.shape:
            raise ValueError(f"w has shape {self.w.shape}, grid has {self.grid.shape}")
        if not np.all(np.isfinite(self.w[self.grid.active])):
            raise ValueError("w must be finite at interior and boundary nodes")

    def copy(self, w: Optional[np.ndarray] = None, t: Optional[float] = None) -> "GraphState":
        return GraphState(self.grid, self.w.copy() if w is None else w,
                          self.t if t is None else t)

    def interior_values(self) -> np.ndarray:
        return self.w[self.grid.interior]


@dataclass
class GeomFields:
    """Per-interior-node geometric package, flattened in C order of the grid."""
    index: np.ndarray      # (N, n) node indices
    x: np.ndarray          # (N, n) coordinates
    w: np.ndarray          # (N,) height u = w
    Dw: np.ndarray         # (N, n)
    D2w: np.ndarray        # (N, n, n)
    g: np.ndarray
    g_inv: np.ndarray
    h: np.ndarray
    lam: np.ndarray        # (N, n) ascending
    v: np.ndarray          # (N,)
    nu: np.ndarray         # (N, n + 1)
    F: np.ndarray
    Phi: np.ndarray
    grad_f: np.ndarray = field(default=None)  # (N, n), in the order of lam

    @property
    def count(self) -> int:
        return int(self.v.shape[0])

    @property
    def lambda_min(self) -> np.ndarray:
        return self.lam[:, 0]

    @property
    def lambda_max(self) -> np.ndarray:
        return self.lam[:, -1]

    def summary(self) -> dict:
        return {
            "max_v": float(np.max(self.v)),
            "min_lambda_min": float(np.min(self.lambda_min)),
            "max_F": float(np.max(self.F)),
        }


@dataclass
class RotationalProfile:
    """Inverse profile r -> (phi^{-1}, phi^{-1}_r, phi^{-1}_rr) of a rotational graph."""
    inverse_profile: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]
    n: int
    name: str = "profile"

    def evaluate(self, r):
        return self.inverse_profile(np.asarray(r, dtype=float))
