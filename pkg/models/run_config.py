from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from app import config
from .curvature_spec import CurvatureSpec

PROFILES = ("sphere_cap", "paraboloid", "table")
BOUNDARIES = ("exact_sphere", "frozen")
DOMAINS = ("disk", "box")
FORMATS = ("trajectory", "snapshots", "manifest")


@dataclass
class GridSection:
    n: int
    spacing: float
    extent: float
    shape: str = "disk"


@dataclass
class InitialSection:
    profile: str
    r0: float = 1.0
    center_height: Optional[float] = None
    curvature: float = 1.0
    file: Optional[Path] = None


@dataclass
class FlowSection:
    t_end: float
    safety: float = config.DEFAULT_SAFETY
    boundary: str = "frozen"
    max_steps: int = config.MAX_STEPS


@dataclass
class MonitorSection:
    name: str
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass
class OutputSection:
    directory: Path = Path("runs")
    snapshot_every: int = config.DEFAULT_SNAPSHOT_EVERY
    formats: List[str] = field(default_factory=lambda: list(FORMATS))


@dataclass
class RunConfig:
    """Validated run configuration, one section per concern."""
    expression: str
    spec: CurvatureSpec
    grid: GridSection
    initial: InitialSection
    flow: FlowSection
    monitors: List[MonitorSection] = field(default_factory=list)
    output: OutputSection = field(default_factory=OutputSection)
    seed: int = config.DEFAULT_SEED
    source: Optional[Path] = None

    def to_dict(self) -> dict:
        """Config echo for the run manifest."""
        def clean(section):
            return {k: (str(v) if isinstance(v, Path) else v) for k, v in asdict(section).items()}

        return {
            "function": {"expr": self.expression, "beta": self.spec.beta},
            "grid": clean(self.grid),
            "initial": clean(self.initial),
            "flow": clean(self.flow),
            "monitors": [{"name": m.name, **m.params} for m in self.monitors],
            "output": clean(self.output),
            "seed": self.seed,
        }
