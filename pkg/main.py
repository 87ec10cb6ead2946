"""
curvflow
Command-line entry point for the curvature flow simulator.
"""

import sys

from app.curvflow_app import CurvFlowApp


def main() -> None:
    """Application entry point."""
    app = CurvFlowApp()
    sys.exit(app.run())


if __name__ == "__main__":
    main()
