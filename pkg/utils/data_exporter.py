import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
import scipy

from app import config
from models.flow_types import Snapshot, SupportCurve, Trajectory

logger = logging.getLogger(__name__)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    if isinstance(value, Path):
        return str(value)
    return value


class DataExporter:
    """Writes run artifacts (CSV tables and JSON documents) into one output directory.

    CSVs carry no wall-clock data so identical runs give byte-identical files.
    """

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.written: List[Path] = []

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def write_frame(self, df: pd.DataFrame, name: str) -> Path:
        path = self._path(name)
        df.to_csv(path, index=False, float_format=config.FLOAT_FORMAT, lineterminator="\n")
        self.written.append(path)
        logger.debug("wrote %s (%d rows)", path, len(df))
        return path

    def write_json(self, data: Dict[str, Any], name: str) -> Path:
        path = self._path(name)
        with path.open("w", encoding="utf-8") as fh:
            json.dump(_jsonable(data), fh, sort_keys=True, indent=2)
            fh.write("\n")
        self.written.append(path)
        return path

    # -- tables -------------------------------------------------------------

    @staticmethod
    def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
        rows = traj.rows()
        monitor_columns = sorted({k for s in traj.snapshots for k in s.monitors})
        columns = config.TRAJECTORY_COLUMNS + monitor_columns
        return pd.DataFrame(rows, columns=columns)

    @staticmethod
    def snapshot_frame(snapshot: Snapshot) -> pd.DataFrame:
        """Grid table; for n = 1 the j and x2 columns stay empty."""
        grid = snapshot.state.grid
        index = np.argwhere(grid.interior)
        x = grid.coords()[grid.interior]
        frame = pd.DataFrame({
            "i": index[:, 0],
            "j": index[:, 1] if grid.n > 1 else pd.array([pd.NA] * len(index), dtype="Int64"),
            "x1": x[:, 0],
            "x2": x[:, 1] if grid.n > 1 else np.nan,
            "w": snapshot.nodes["u"],
            "v": snapshot.nodes["v"],
            "lambda_min": snapshot.nodes["lambda_min"],
            "lambda_max": snapshot.nodes["lambda_max"],
            "F": snapshot.nodes["F"],
        })
        return frame[config.SNAPSHOT_COLUMNS]

    @staticmethod
    def snapshot_header(snapshot: Snapshot, spec_dict: Dict[str, Any]) -> Dict[str, Any]:
        return {"t": snapshot.t, "grid": snapshot.state.grid.to_dict(), "spec": spec_dict,
                "summary": snapshot.summary}

    @staticmethod
    def support_frame(curve: SupportCurve) -> pd.DataFrame:
        return pd.DataFrame({"theta": curve.theta, "S": curve.S, "kappa": curve.curvature()},
                            columns=config.SUPPORT_COLUMNS)

    # -- artifacts ----------------------------------------------------------

    def export_trajectory(self, traj: Trajectory, snapshots: bool = True) -> List[Path]:
        paths = [self.write_frame(self.trajectory_frame(traj), "trajectory.csv")]
        if snapshots:
            spec = traj.config.spec.to_dict()
            for k, snap in enumerate(traj.snapshots):
                paths.append(self.write_frame(self.snapshot_frame(snap), f"snapshot_{k:04d}.csv"))
                paths.append(self.write_json(self.snapshot_header(snap, spec), f"snapshot_{k:04d}.json"))
        return paths

    def export_support_curve(self, curve: SupportCurve, name: str = "support_curve.csv") -> Path:
        return self.write_frame(self.support_frame(curve), name)

    def export_reports(self, reports: Iterable, name: str = "monitors.json") -> Path:
        return self.write_json({"reports": [r.to_dict() for r in reports]}, name)

    def write_manifest(self, command: str, payload: Dict[str, Any], wall_time: float,
                       status: int, error: Optional[Dict[str, Any]] = None) -> Path:
        """Run manifest; see docs/manifest_schema.md."""
        manifest = {
            "tool": config.TOOL_NAME,
            "version": config.TOOL_VERSION,
            "versions": {"numpy": np.__version__, "scipy": scipy.__version__, "pandas": pd.__version__},
            "command": command,
            "exit_status": status,
            "wall_time_seconds": wall_time,
            "artifacts": sorted(p.name for p in self.written),
            "error": error,
        }
        manifest.update(payload)
        return self.write_json(manifest, config.MANIFEST_NAME)
