import json
import sys
from typing import Iterable, List, Optional, TextIO, Tuple

import pandas as pd


class ConsoleComponents:
    """Reusable console rendering helpers (headers, tables, status lines)."""

    stream: Optional[TextIO] = None

    @classmethod
    def _write(cls, text: str = "") -> None:
        (cls.stream or sys.stdout).write(text + "\n")

    @classmethod
    def render_header(cls, title: str, subtitle: str = "") -> None:
        cls._write(title)
        cls._write("=" * len(title))
        if subtitle:
            cls._write(subtitle)
        cls._write()

    @classmethod
    def render_table(cls, df: pd.DataFrame, float_format: str = "{:.6g}") -> None:
        if df.empty:
            cls._write("(no rows)")
            return
        cls._write(df.to_string(index=False, float_format=float_format.format))
        cls._write()

    @classmethod
    def render_metrics(cls, metrics: Iterable[Tuple[str, object]]) -> None:
        items: List[Tuple[str, object]] = list(metrics)
        width = max((len(label) for label, _ in items), default=0)
        for label, value in items:
            shown = f"{value:.6g}" if isinstance(value, float) else str(value)
            cls._write(f"  {label.ljust(width)}  {shown}")
        cls._write()

    @classmethod
    def render_status(cls, ok: bool, message: str) -> None:
        cls._write(f"[{'PASS' if ok else 'FAIL'}] {message}")

    @classmethod
    def render_error(cls, error: dict, stream: Optional[TextIO] = None) -> None:
        """Machine-readable error JSON on stderr."""
        out = stream or sys.stderr
        out.write(json.dumps(error, sort_keys=True) + "\n")

    @classmethod
    def render_artifacts(cls, paths: Iterable) -> None:
        names = sorted(str(p) for p in paths)
        if names:
            cls._write("artifacts:")
            for name in names:
                cls._write(f"  {name}")
