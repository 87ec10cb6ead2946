from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .errors import ValidationError


@dataclass(frozen=True)
class CutoffParams:
    """Localization radius R, cutoff decay rate gamma and sub-level fraction sigma."""
    R: float
    gamma: float
    sigma: float = 0.5

    def __post_init__(self):
        errors = []
        if not self.R > 0.0:
            errors.append(("R", "must be positive"))
        if not 0.0 < self.gamma <= self.R:
            errors.append(("gamma", "must lie in (0, R]"))
        if not 0.0 < self.sigma < 1.0:
            errors.append(("sigma", "must lie in (0, 1)"))
        if errors:
            raise ValidationError(errors)

    def to_dict(self) -> dict:
        return {"R": self.R, "gamma": self.gamma, "sigma": self.sigma}


@dataclass
class MonitorReport:
    """Outcome of one inequality check; ``margin = rhs - lhs``."""
    name: str
    lhs: float
    rhs: float
    tolerance: float
    context: Dict[str, Any] = field(default_factory=dict)
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "context": self.context,
            "extras": self.extras,
        }


@dataclass(frozen=True)
class BarrierParams:
    """Parameters of the rotational barrier family and its time horizon."""
    R0: float
    sigma: float
    delta: float
    s: float
    beta: float
    n: int
    t0: float
    l: float = 1.0

    def __post_init__(self):
        errors = []
        if not 0.0 < self.R0 < 1.0:
            errors.append(("R0", "must lie in (0, 1)"))
        if not 0.0 < self.sigma < 1.0:
            errors.append(("sigma", "must lie in (0, 1)"))
        if not self.delta > 0.0:
            errors.append(("delta", "must be positive"))
        if not 0.0 < self.s <= 1.0:
            errors.append(("s", "must lie in (0, 1]"))
        if self.beta < 1.0:
            errors.append(("beta", "must be >= 1"))
        if self.n < 1:
            errors.append(("n", "must be >= 1"))
        if not self.t0 > 0.0:
            errors.append(("t0", "must be positive"))
        if errors:
            raise ValidationError(errors)

    @property
    def delta_exponent(self) -> float:
        return self.s * self.beta / self.n

    def to_dict(self) -> dict:
        return {
            "R0": self.R0, "sigma": self.sigma, "delta": self.delta, "l": self.l,
            "s": self.s, "beta": self.beta, "n": self.n, "t0": self.t0,
        }

    def replace(self, delta: Optional[float] = None, t0: Optional[float] = None) -> "BarrierParams":
        return BarrierParams(self.R0, self.sigma, self.delta if delta is None else delta,
                             self.s, self.beta, self.n, self.t0 if t0 is None else t0, self.l)
