from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np

from app import config
from .curvature_spec import CurvatureSpec
from .graph_state import GraphState


@dataclass(frozen=True)
class ExactSphereBoundary:
    """Boundary nodes follow the exact shrinking lower hemisphere."""
    r0: float
    center_height: float

    def to_dict(self) -> dict:
        return {"kind": "exact_sphere", "r0": self.r0, "center_height": self.center_height}


@dataclass(frozen=True)
class FrozenBoundary:
    """Boundary nodes keep their initial values."""

    def to_dict(self) -> dict:
        return {"kind": "frozen"}


Boundary = Union[ExactSphereBoundary, FrozenBoundary]


@dataclass
class FlowConfig:
    spec: CurvatureSpec
    t_end: float
    boundary: Boundary = field(default_factory=FrozenBoundary)
    safety: float = config.DEFAULT_SAFETY
    snapshot_every: int = config.DEFAULT_SNAPSHOT_EVERY
    lambda_floor: float = config.LAMBDA_FLOOR
    max_steps: int = config.MAX_STEPS

    def __post_init__(self):
        if not 0.0 < self.safety <= 1.0:
            raise ValueError(f"safety must lie in (0, 1], got {self.safety}")
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "t_end": self.t_end,
            "boundary": self.boundary.to_dict(),
            "safety": self.safety,
            "snapshot_every": self.snapshot_every,
            "lambda_floor": self.lambda_floor,
        }


@dataclass
class SupportCurve:
    """Support function samples of a closed convex plane curve on a uniform circle grid."""
    S: np.ndarray
    t: float = 0.0
    beta: float = 1.0
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        self.S = np.asarray(self.S, dtype=float)
        if self.S.ndim != 1 or self.S.shape[0] < config.MIN_SUPPORT_NODES:
            raise ValueError(f"support curve needs at least {config.MIN_SUPPORT_NODES} nodes")
        if self.beta < 1.0:
            raise ValueError("beta must be >= 1")

    @property
    def m(self) -> int:
        return int(self.S.shape[0])

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.m

    @property
    def theta(self) -> np.ndarray:
        return self.dtheta * np.arange(self.m)

    def radius_of_curvature(self) -> np.ndarray:
        """Discrete S_theta_theta + S."""
        S = self.S
        return (np.roll(S, -1) - 2.0 * S + np.roll(S, 1)) / self.dtheta ** 2 + S

    def curvature(self) -> np.ndarray:
        return 1.0 / self.radius_of_curvature()

    def copy(self, S: Optional[np.ndarray] = None, t: Optional[float] = None) -> "SupportCurve":
        return SupportCurve(self.S.copy() if S is None else S, self.t if t is None else t,
                            self.beta, self.origin)


@dataclass
class Snapshot:
    """One stored time level: the state plus the per-node fields monitors read.

    ``nodes`` holds interior-node arrays ``u``, ``v``, ``lambda_min``, ``lambda_max`` and ``F``.
    """
    t: float
    dt: float
    state: GraphState
    nodes: Dict[str, np.ndarray]
    monitors: Dict[str, float] = field(default_factory=dict)

    @property
    def summary(self) -> Dict[str, float]:
        return {
            "max_v": float(np.max(self.nodes["v"])),
            "min_lambda_min": float(np.min(self.nodes["lambda_min"])),
            "max_F": float(np.max(self.nodes["F"])),
        }

    def row(self) -> Dict[str, float]:
        row = {
            "t": self.t,
            "dt": self.dt,
            "min_w": float(np.min(self.state.interior_values())),
            "max_w": float(np.max(self.state.interior_values())),
        }
        row.update(self.summary)
        row.update(self.monitors)
        return row


@dataclass
class Trajectory:
    config: FlowConfig
    snapshots: List[Snapshot] = field(default_factory=list)
    error: Optional[Dict[str, Any]] = None
    steps: int = 0

    @property
    def completed(self) -> bool:
        return self.error is None

    @property
    def times(self) -> List[float]:
        return [s.t for s in self.snapshots]

    def append(self, snapshot: Snapshot) -> None:
        if self.snapshots and snapshot.t <= self.snapshots[-1].t:
            raise ValueError("snapshot times must be strictly increasing")
        self.snapshots.append(snapshot)

    def final_state(self) -> GraphState:
        return self.snapshots[-1].state

    def rows(self) -> List[Dict[str, float]]:
        return [s.row() for s in self.snapshots]


@dataclass
class SupportTrajectory:
    curves: List[SupportCurve] = field(default_factory=list)
    collapse_time: Optional[float] = None
    steps: int = 0
