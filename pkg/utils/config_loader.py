"""Load and validate YAML run configurations.

Validation walks every section and reports all problems together; nothing is
computed until the whole document is valid. See docs/config_grammar.md.
"""

import logging
from pathlib import Path
from typing import Any, List, Optional, Tuple

from ruamel.yaml import YAML
from ruamel.yaml.error import MarkedYAMLError, YAMLError
from ruamel.yaml.scalarstring import DoubleQuotedScalarString, SingleQuotedScalarString

from app import config
from models.curvature_spec import CurvatureSpec, family_errors
from models.errors import ParseError, ValidationError
from models.run_config import (
    BOUNDARIES, DOMAINS, FORMATS, PROFILES, FlowSection, GridSection, InitialSection,
    MonitorSection, OutputSection, RunConfig,
)
from services.estimates_service import monitor_errors
from .expression_parser import parse_expression

logger = logging.getLogger(__name__)

SECTIONS = ("function", "grid", "initial", "flow", "monitors", "output", "seed")

Errors = List[Tuple[str, str]]


class _Section:
    """Typed field access that records problems instead of raising."""

    def __init__(self, name: str, data: Any, errors: Errors):
        self.name = name
        self.errors = errors
        if data is None:
            data = {}
        if not isinstance(data, dict):
            errors.append((name, "must be a mapping"))
            data = {}
        self.data = data

    def _missing(self, key):
        self.errors.append((f"{self.name}.{key}", "is required"))

    def number(self, key: str, default=None, required=False, check=None, message=""):
        if key not in self.data:
            if required:
                self._missing(key)
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.errors.append((f"{self.name}.{key}", f"must be a number, got {value!r}"))
            return default
        if check is not None and not check(value):
            self.errors.append((f"{self.name}.{key}", message))
        return float(value)

    def integer(self, key: str, default=None, required=False, check=None, message=""):
        if key not in self.data:
            if required:
                self._missing(key)
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            self.errors.append((f"{self.name}.{key}", f"must be an integer, got {value!r}"))
            return default
        if check is not None and not check(value):
            self.errors.append((f"{self.name}.{key}", message))
        return int(value)

    def choice(self, key: str, options, default=None, required=False):
        if key not in self.data:
            if required:
                self._missing(key)
            return default
        value = self.data[key]
        if value not in options:
            self.errors.append((f"{self.name}.{key}", f"must be one of {list(options)}, got {value!r}"))
            return default
        return str(value)

    def position(self, key: str) -> Tuple[int, int]:
        """1-based line/column where a string value starts, (1, 1) when unknown."""
        lc = getattr(self.data, "lc", None)
        try:
            line, column = lc.value(key)
        except (AttributeError, KeyError, TypeError):
            return 1, 1
        quoted = isinstance(self.data[key], (SingleQuotedScalarString, DoubleQuotedScalarString))
        return line + 1, column + (2 if quoted else 1)

    def unknown_keys(self, allowed) -> None:
        for key in self.data:
            if key not in allowed:
                self.errors.append((f"{self.name}.{key}", "unknown key"))


def _load_yaml(text: str) -> Any:
    yaml = YAML(typ="rt")
    yaml.preserve_quotes = True
    try:
        return yaml.load(text)
    except MarkedYAMLError as err:
        mark = err.problem_mark or err.context_mark
        line, column = (mark.line + 1, mark.column + 1) if mark is not None else (1, 1)
        raise ParseError(err.problem or "malformed document", line, column) from err
    except YAMLError as err:
        raise ParseError(str(err)) from err


def _function(data, errors: Errors, n: Optional[int]):
    section = _Section("function", data, errors)
    section.unknown_keys({"expr", "beta"})
    beta = section.number("beta", default=1.0, check=lambda b: b >= 1.0, message="beta must be >= 1")
    expr = section.data.get("expr")
    if expr is None:
        errors.append(("function.expr", "is required"))
        return None, None
    if not isinstance(expr, str):
        errors.append(("function.expr", "must be a quoted expression string"))
        return None, None
    line, column = section.position("expr")
    family = parse_expression(expr, line, column)
    if n is None:
        return expr, None
    problems = family_errors(family, n, "function.expr")
    errors.extend(problems)
    if problems or beta is None or beta < 1.0:
        return expr, None
    return expr, CurvatureSpec(family, n, beta)


def _grid(data, errors: Errors) -> Optional[GridSection]:
    section = _Section("grid", data, errors)
    section.unknown_keys({"n", "spacing", "extent", "shape"})
    n = section.integer("n", required=True, check=lambda k: k in (1, 2), message="n must be 1 or 2")
    spacing = section.number("spacing", required=True, check=lambda h: h > 0, message="must be positive")
    extent = section.number("extent", required=True, check=lambda e: e > 0, message="must be positive")
    shape = section.choice("shape", DOMAINS, default="disk")
    if spacing and extent and spacing > 0 and extent > 0 and extent / spacing < 2:
        errors.append(("grid.spacing", "grid needs at least two cells per half-width"))
    if None in (n, spacing, extent):
        return None
    return GridSection(n=n, spacing=spacing, extent=extent, shape=shape)


def _initial(data, errors: Errors, base_dir: Path) -> Optional[InitialSection]:
    section = _Section("initial", data, errors)
    section.unknown_keys({"profile", "r0", "center_height", "curvature", "file"})
    profile = section.choice("profile", PROFILES, required=True)
    r0 = section.number("r0", default=1.0, check=lambda r: r > 0, message="must be positive")
    center = section.number("center_height")
    curvature = section.number("curvature", default=1.0, check=lambda a: a > 0, message="must be positive")
    path = None
    if profile == "table":
        raw = section.data.get("file")
        if not raw:
            errors.append(("initial.file", "is required for the table profile"))
        else:
            path = (base_dir / str(raw)).resolve()
            if not path.is_file():
                errors.append(("initial.file", f"file not found: {path}"))
    if profile is None:
        return None
    return InitialSection(profile=profile, r0=r0, center_height=center, curvature=curvature, file=path)


def _flow(data, errors: Errors) -> Optional[FlowSection]:
    section = _Section("flow", data, errors)
    section.unknown_keys({"t_end", "safety", "boundary", "max_steps"})
    t_end = section.number("t_end", required=True, check=lambda t: t > 0, message="must be positive")
    safety = section.number("safety", default=config.DEFAULT_SAFETY,
                            check=lambda s: 0 < s <= 1, message="must lie in (0, 1]")
    boundary = section.choice("boundary", BOUNDARIES, default="frozen")
    max_steps = section.integer("max_steps", default=config.MAX_STEPS,
                                check=lambda k: k > 0, message="must be positive")
    if t_end is None:
        return None
    return FlowSection(t_end=t_end, safety=safety, boundary=boundary, max_steps=max_steps)


def _monitors(data, errors: Errors) -> List[MonitorSection]:
    if data is None:
        return []
    if not isinstance(data, list):
        errors.append(("monitors", "must be a list"))
        return []
    monitors = []
    for i, entry in enumerate(data):
        path = f"monitors[{i}]"
        if not isinstance(entry, dict) or "name" not in entry:
            errors.append((path, "each monitor needs a name"))
            continue
        params = {k: (list(v) if isinstance(v, list) else v) for k, v in entry.items() if k != "name"}
        problems = monitor_errors(str(entry["name"]), params, path)
        for key in ("R", "gamma", "sigma", "r0"):
            if key in params and (isinstance(params[key], bool) or not isinstance(params[key], (int, float))):
                problems.append((f"{path}.{key}", "must be a number"))
        errors.extend(problems)
        if not problems:
            monitors.append(MonitorSection(str(entry["name"]), params))
    return monitors


def _output(data, errors: Errors, base_dir: Path) -> OutputSection:
    section = _Section("output", data, errors)
    section.unknown_keys({"directory", "snapshot_every", "formats"})
    directory = section.data.get("directory", "runs")
    snapshot_every = section.integer("snapshot_every", default=config.DEFAULT_SNAPSHOT_EVERY,
                                     check=lambda k: k >= 1, message="must be >= 1")
    formats = section.data.get("formats", list(FORMATS))
    if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
        errors.append(("output.formats", f"must be a list drawn from {list(FORMATS)}"))
        formats = list(FORMATS)
    return OutputSection(directory=(base_dir / str(directory)), snapshot_every=snapshot_every,
                         formats=list(formats))


def parse_config(text: str, base_dir: Optional[Path] = None, source: Optional[Path] = None) -> RunConfig:
    """Validated RunConfig from YAML text.

    Raises ParseError (line/column) for malformed documents or expressions and
    ValidationError listing every invalid field otherwise.
    """
    base_dir = Path(".") if base_dir is None else Path(base_dir)
    data = _load_yaml(text)
    errors: Errors = []
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValidationError([("document", "top level must be a mapping of sections")])
    for key in data:
        if key not in SECTIONS:
            errors.append((str(key), "unknown section"))
    for key in ("function", "grid", "initial", "flow"):
        if key not in data:
            errors.append((key, "section is required"))

    grid = _grid(data.get("grid"), errors) if "grid" in data else None
    expr, spec = _function(data.get("function"), errors, grid.n if grid else None) \
        if "function" in data else (None, None)
    initial = _initial(data.get("initial"), errors, base_dir) if "initial" in data else None
    flow = _flow(data.get("flow"), errors) if "flow" in data else None
    monitors = _monitors(data.get("monitors"), errors)
    output = _output(data.get("output"), errors, base_dir)
    seed = data.get("seed", config.DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        errors.append(("seed", "must be a nonnegative integer"))
    if initial is not None and flow is not None and flow.boundary == "exact_sphere" \
            and initial.profile != "sphere_cap":
        errors.append(("flow.boundary", "exact_sphere boundary requires the sphere_cap profile"))

    if errors:
        raise ValidationError(errors)
    logger.debug("parsed run config: %s beta=%g", expr, spec.beta)
    return RunConfig(expression=expr, spec=spec, grid=grid, initial=initial, flow=flow,
                     monitors=monitors, output=output, seed=int(seed), source=source)


def load_config(path: Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ValidationError([("config", f"file not found: {path}")])
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent, source=path.resolve())
