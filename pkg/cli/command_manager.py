import logging
import time
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from app import config
from models.curvature_spec import CurvatureSpec
from models.estimate_types import BarrierParams
from models.flow_types import ExactSphereBoundary, FlowConfig, FrozenBoundary
from models.graph_state import GraphGrid
from models.run_config import RunConfig
from services.barrier_service import barrier_supersolution_check, maximal_delta
from services.estimates_service import build_monitor, run_monitors
from services.flow_service import FlowRunner, paraboloid_state, sphere_cap_state, table_state
from services.geometry_service import validate_initial_graph
from services.symfun_service import check_condition1
from services.verification_service import PROFILES, graph_vs_support, sphere_convergence
from utils.config_loader import load_config
from utils.data_exporter import DataExporter
from utils.expression_parser import parse_expression
from .console_components import ConsoleComponents

logger = logging.getLogger(__name__)


class CommandManager:
    """One method per console command; each returns the process exit status."""

    def __init__(self, out_dir: Optional[Path] = None):
        self.out_dir = out_dir
        self.ui = ConsoleComponents

    def _exporter(self, default: Path) -> DataExporter:
        return DataExporter(self.out_dir if self.out_dir is not None else default)

    # -- run ----------------------------------------------------------------

    def cmd_run(self, config_path: Path) -> int:
        """Integrate the flow described by a run configuration and write its artifacts."""
        started = time.perf_counter()
        cfg = load_config(config_path)
        exporter = self._exporter(cfg.output.directory)
        grid = self._build_grid(cfg)
        w0 = self._initial_state(cfg, grid)
        report = validate_initial_graph(w0, cfg.spec)
        flow_cfg = FlowConfig(spec=cfg.spec, t_end=cfg.flow.t_end, boundary=self._boundary(cfg),
                              safety=cfg.flow.safety, snapshot_every=cfg.output.snapshot_every,
                              max_steps=cfg.flow.max_steps)
        monitors = [build_monitor(m.name, **m.params) for m in cfg.monitors]

        self.ui.render_header(f"{config.TOOL_NAME} run", f"{cfg.spec.describe()}  beta={cfg.spec.beta:g}")
        traj = FlowRunner(flow_cfg, monitors).run(w0)
        reports = list(run_monitors(traj, monitors).values())

        if "trajectory" in cfg.output.formats:
            exporter.export_trajectory(traj, snapshots="snapshots" in cfg.output.formats)
        if reports:
            exporter.export_reports(reports)

        status = config.EXIT_OK
        if not traj.completed:
            status = config.EXIT_NUMERICAL
        elif any(not r.passed for r in reports):
            status = config.EXIT_MONITOR
        self.ui.render_metrics([("final t", traj.snapshots[-1].t), ("steps", traj.steps),
                                ("snapshots", len(traj.snapshots))])
        for r in reports:
            self.ui.render_status(r.passed, f"{r.name}: margin {r.margin:.6g}")
        if "manifest" in cfg.output.formats:
            exporter.write_manifest(
                "run",
                {"config": cfg.to_dict(), "seed": cfg.seed, "initial_checks": report,
                 "monitors": {r.name: r.to_dict() for r in reports},
                 "steps": traj.steps, "final_t": traj.snapshots[-1].t},
                time.perf_counter() - started, status, traj.error)
        self.ui.render_artifacts(exporter.written)
        return status

    @staticmethod
    def _build_grid(cfg: RunConfig) -> GraphGrid:
        g = cfg.grid
        if g.shape == "box":
            return GraphGrid.box(g.n, g.spacing, g.extent)
        return GraphGrid.disk(g.n, g.spacing, g.extent)

    @staticmethod
    def _initial_state(cfg: RunConfig, grid: GraphGrid):
        init = cfg.initial
        if init.profile == "sphere_cap":
            return sphere_cap_state(grid, init.r0, init.center_height)
        if init.profile == "paraboloid":
            return paraboloid_state(grid, init.curvature)
        return table_state(grid, init.file)

    @staticmethod
    def _boundary(cfg: RunConfig):
        if cfg.flow.boundary == "exact_sphere":
            c = cfg.initial.r0 if cfg.initial.center_height is None else cfg.initial.center_height
            return ExactSphereBoundary(cfg.initial.r0, c)
        return FrozenBoundary()

    # -- check-fn -----------------------------------------------------------

    def cmd_check_fn(self, expr: str, n: int, samples: int, seed: int) -> int:
        """Sampled admissibility certification of one curvature function."""
        started = time.perf_counter()
        spec = CurvatureSpec(parse_expression(expr), n, 1.0)
        report = check_condition1(spec, samples, seed)
        exporter = self._exporter(Path("runs") / "check-fn")
        table = pd.DataFrame([e.to_dict() for e in report.entries],
                             columns=["condition", "margin", "passed", "note"])
        exporter.write_frame(table, "certification.csv")
        exporter.write_json(report.to_dict(), "certification.json")
        self.ui.render_header("Admissibility certification", f"{report.function}  n={n}  samples={samples}")
        self.ui.render_table(table)
        status = config.EXIT_OK if report.passed else config.EXIT_MONITOR
        exporter.write_manifest("check-fn", {"config": {"expr": expr, "n": n, "samples": samples},
                                             "seed": seed}, time.perf_counter() - started, status)
        return status

    # -- sphere-test --------------------------------------------------------

    def cmd_sphere_test(self, r0: float, beta: float, expr: str, grids: Sequence[int],
                        t_end: float, n: int = 2) -> int:
        """Convergence table against the exact shrinking sphere."""
        started = time.perf_counter()
        spec = CurvatureSpec(parse_expression(expr), n, beta)
        rows = sphere_convergence(spec, r0, grids, t_end)
        table = pd.DataFrame(rows, columns=["nodes", "spacing", "steps", "t", "max_error", "order", "status"])
        exporter = self._exporter(Path("runs") / "sphere-test")
        exporter.write_frame(table, "convergence.csv")
        self.ui.render_header("Shrinking sphere convergence", f"{spec.describe()}  beta={beta:g}  t_end={t_end:g}")
        self.ui.render_table(table)
        status = config.EXIT_OK if all(r["status"] == "ok" for r in rows) else config.EXIT_NUMERICAL
        exporter.write_manifest("sphere-test", {"config": {"r0": r0, "beta": beta, "expr": expr, "n": n,
                                                           "grids": list(grids), "t_end": t_end}},
                                time.perf_counter() - started, status)
        return status

    # -- cross-validate -----------------------------------------------------

    def cmd_cross_validate(self, profile: str, beta: float, grids: Sequence[int], t_end: float,
                           eps: float = 1.0 / 64) -> int:
        """Hausdorff distance between the n = 1 graph run and the doubled support-curve run."""
        started = time.perf_counter()
        rows = [graph_vs_support(PROFILES[profile], beta, nodes, nodes - 1, t_end, eps=eps)
                for nodes in grids]
        table = pd.DataFrame(rows, columns=["graph_nodes", "support_nodes", "t", "hausdorff",
                                            "graph_steps", "support_steps", "status"])
        exporter = self._exporter(Path("runs") / "cross-validate")
        exporter.write_frame(table, "cross_validation.csv")
        for row in rows:
            exporter.export_support_curve(row["support_curve"], f"support_curve_{row['support_nodes']}.csv")
        self.ui.render_header("Graph vs support-curve flow", f"profile={profile}  beta={beta:g}  t_end={t_end:g}")
        self.ui.render_table(table)
        status = config.EXIT_OK if all(r["status"] == "ok" for r in rows) else config.EXIT_NUMERICAL
        exporter.write_manifest("cross-validate", {"config": {"profile": profile, "beta": beta, "eps": eps,
                                                              "grids": list(grids), "t_end": t_end}},
                                time.perf_counter() - started, status)
        return status

    # -- barrier ------------------------------------------------------------

    def cmd_barrier(self, R0: float, sigma: float, s: float, beta: float, n: int, t0: float,
                    delta: Optional[float], samples: int, seed: int) -> int:
        """Supersolution check of the rotational barrier; delta defaults to its maximal value."""
        started = time.perf_counter()
        if delta is None:
            delta = maximal_delta(R0, sigma, s, beta, n, t0)
        params = BarrierParams(R0=R0, sigma=sigma, delta=delta, s=s, beta=beta, n=n, t0=t0)
        report = barrier_supersolution_check(params, samples, seed)
        exporter = self._exporter(Path("runs") / "barrier")
        exporter.write_json({"params": params.to_dict(), "report": report.to_dict()}, "barrier.json")
        self.ui.render_header("Barrier supersolution check", f"s={s:g}  beta={beta:g}  n={n}  delta={delta:.6g}")
        self.ui.render_metrics(sorted(report.extras.items()))
        self.ui.render_status(report.passed, f"worst inequality: {report.context['worst_inequality']}")
        status = config.EXIT_OK if report.passed else config.EXIT_MONITOR
        exporter.write_manifest("barrier", {"config": params.to_dict(), "seed": seed},
                                time.perf_counter() - started, status)
        return status


def parse_grid_list(text: str) -> List[int]:
    values = [int(part) for part in text.split(",") if part.strip()]
    if not values or any(v < 5 for v in values):
        raise ValueError("grid sizes must be integers >= 5")
    return values
