import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from cli import CommandManager, ConsoleComponents
from cli.command_manager import parse_grid_list
from models.errors import CurvFlowError, NumericalAbort
from . import config

logger = logging.getLogger(__name__)


class CurvFlowApp:
    """Main application controller - parses the command line and routes to a command."""

    def __init__(self):
        self.ui = ConsoleComponents
        self.commands: Optional[CommandManager] = None

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Application entry point; returns the process exit status."""
        parser = self._build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            # argparse exits with 2 on usage errors; --help exits with 0
            return config.EXIT_OK if exc.code == 0 else config.EXIT_USAGE
        self._configure_logging(args.verbose)
        self.commands = CommandManager(args.out)
        return self._route_to_command(args)

    def _configure_logging(self, verbose: bool = False) -> None:
        load_dotenv()
        level = "DEBUG" if verbose else os.getenv(config.LOG_LEVEL_ENV, config.DEFAULT_LOG_LEVEL).upper()
        logging.basicConfig(
            level=getattr(logging, level, logging.WARNING),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        logging.captureWarnings(True)

    def _build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog=config.TOOL_NAME,
                                         description="Fully nonlinear curvature flow simulator and estimate checks")
        parser.add_argument("--version", action="version", version=f"%(prog)s {config.TOOL_VERSION}")
        parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
        sub = parser.add_subparsers(dest="command", required=True)

        def add(name: str, help_text: str) -> argparse.ArgumentParser:
            p = sub.add_parser(name, help=help_text)
            p.add_argument("--out", type=Path, default=None, help="output directory")
            return p

        p = add("run", "integrate a flow from a YAML run configuration")
        p.add_argument("config", type=Path)

        p = add("check-fn", "sampled admissibility certification of a curvature function")
        p.add_argument("--expr", required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)

        p = add("sphere-test", "convergence study against the shrinking sphere")
        p.add_argument("--r0", type=float, default=1.0)
        p.add_argument("--beta", type=float, default=1.0)
        p.add_argument("--expr", default="mean")
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--grids", type=parse_grid_list, default=[17, 33, 65])
        p.add_argument("--t-end", type=float, default=0.1)

        p = add("cross-validate", "graph flow against the doubled support-curve flow (n = 1)")
        p.add_argument("--profile", choices=["parabola"], default="parabola")
        p.add_argument("--beta", type=float, default=1.0)
        p.add_argument("--grids", type=parse_grid_list, default=[129, 257])
        p.add_argument("--t-end", type=float, default=0.1)

        p = add("barrier", "supersolution check of the rotational barrier")
        p.add_argument("--R0", type=float, required=True)
        p.add_argument("--sigma", type=float, required=True)
        p.add_argument("--s", type=float, required=True)
        p.add_argument("--beta", type=float, required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--t0", type=float, required=True)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--samples", type=int, default=config.DEFAULT_BARRIER_SAMPLES)
        p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
        return parser

    def _route_to_command(self, args: argparse.Namespace) -> int:
        """Dispatch and map library errors onto exit statuses."""
        try:
            if args.command == "run":
                return self.commands.cmd_run(args.config)
            if args.command == "check-fn":
                return self.commands.cmd_check_fn(args.expr, args.n, args.samples, args.seed)
            if args.command == "sphere-test":
                return self.commands.cmd_sphere_test(args.r0, args.beta, args.expr, args.grids,
                                                     args.t_end, args.n)
            if args.command == "cross-validate":
                return self.commands.cmd_cross_validate(args.profile, args.beta, args.grids, args.t_end)
            return self.commands.cmd_barrier(args.R0, args.sigma, args.s, args.beta, args.n, args.t0,
                                             args.delta, args.samples, args.seed)
        except NumericalAbort as err:
            logger.error("numerical abort: %s", err)
            self.ui.render_error(err.to_dict())
            return config.EXIT_NUMERICAL
        except CurvFlowError as err:
            self.ui.render_error(err.to_dict())
            return config.EXIT_USAGE
        except (ValueError, FileNotFoundError) as err:
            self.ui.render_error({"error": type(err).__name__, "message": str(err), "context": {}})
            return config.EXIT_USAGE
