# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Run configuration: loading, validation and defaults.

A run is described by a YAML (or JSON) document with the sections
``geometry``, ``solver``, ``incident``, ``output`` and ``verify``. The
metadata file written next to the results of a run embeds the configuration
under the ``config`` key and is accepted in place of the original file.

.. code-block:: yaml

    geometry:
      kind: kite
    solver:
      k: 1.0
      eta: 1.0
      n: 64
    incident:
      kind: planewave-k
      direction: 0.0
    output:
      directory: results
      farfield_directions: 360
"""

from __future__ import annotations

import logging
import math
import pathlib
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import attrs
import numpy as np
import yaml

from .bie import SolverConfig
from .fields import GridSpec
from .geometry import (
    BoundaryCurve,
    GeometryError,
    contains,
    distance_to_curve,
    make_circle,
    make_ellipse,
    make_fourier,
    make_kite,
)
from .incident import IncidentField, IncidentFieldError, IncidentKind
from .verify import MULTI_SOLVE_TOLERANCE, ORACLE_TOLERANCE, SOLVER_TOLERANCE

logger = logging.getLogger(__name__)

GEOMETRY_KINDS = ("circle", "ellipse", "kite", "fourier")
SECTIONS = ("geometry", "solver", "incident", "output", "verify")

_MISSING = object()


class ConfigError(ValueError):
    """A configuration value is missing, malformed or out of range."""

    def __init__(self, field: str, message: str, line: Optional[int] = None):
        super().__init__(field, message, line)
        self.field = field
        self.message = message
        self.line = line

    def __str__(self) -> str:
        where = f" (line {self.line})" if self.line is not None else ""
        return f"{self.field}: {self.message}{where}"


def _node_lines(node: Optional[yaml.Node], prefix: str = "") -> Dict[str, int]:
    """Maps dotted paths to the 1-based line where each value starts."""
    lines: Dict[str, int] = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            lines[path] = key_node.start_mark.line + 1
            lines.update(_node_lines(value_node, path))
    elif isinstance(node, yaml.SequenceNode):
        for index, item in enumerate(node.value):
            path = f"{prefix}[{index}]"
            lines[path] = item.start_mark.line + 1
            lines.update(_node_lines(item, path))
    return lines


def _is_point(value: Any, size: int = 2) -> bool:
    return (
        isinstance(value, (list, tuple))
        and len(value) == size
        and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)
    )


class _Section:
    """Typed access to one mapping of the document, reporting errors with
    their dotted path and line."""

    def __init__(self, name: str, data: Any, lines: Mapping[str, int]):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(name, "must be a mapping", lines.get(name))
        self.name = name
        self.data = data
        self.lines = lines

    def error(self, key: str, message: str) -> ConfigError:
        path = f"{self.name}.{key}"
        line = self.lines.get(path, self.lines.get(self.name))
        return ConfigError(path, message, line)

    def check_keys(self, allowed: Sequence[str]) -> None:
        for key in self.data:
            if key not in allowed:
                raise self.error(
                    key, f"unknown key, expected one of {', '.join(allowed)}"
                )

    def raw(self, key: str, default: Any = _MISSING) -> Any:
        if key in self.data and self.data[key] is not None:
            return self.data[key]
        if default is _MISSING:
            raise self.error(key, "is required")
        return default

    def number(
        self, key: str, default: Any = _MISSING, positive: bool = False
    ) -> float:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(key, f"must be a number, got {value!r}")
        if not math.isfinite(value):
            raise self.error(key, "must be finite")
        if positive and not value > 0:
            raise self.error(key, f"must be positive, got {value!r}")
        return float(value)

    def integer(self, key: str, default: Any = _MISSING, minimum: int = 1) -> int:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(key, f"must be an integer, got {value!r}")
        if value < minimum:
            raise self.error(key, f"must be at least {minimum}, got {value}")
        return value

    def choice(self, key: str, choices: Sequence[str], default: Any = _MISSING) -> str:
        value = self.raw(key, default)
        if value not in choices:
            raise self.error(key, f"must be one of {', '.join(choices)}, got {value!r}")
        return value

    def vector(self, key: str, size: int = 2, default: Any = _MISSING):
        value = self.raw(key, default)
        if value is None:
            return None
        if not _is_point(value, size):
            raise self.error(key, f"must be a list of {size} numbers, got {value!r}")
        return tuple(float(c) for c in value)

    def vectors(self, key: str, default: Any = _MISSING) -> List[Tuple[float, ...]]:
        value = self.raw(key, default)
        if not isinstance(value, (list, tuple)):
            raise self.error(key, f"must be a list, got {value!r}")
        result = []
        for index, item in enumerate(value):
            if not _is_point(item):
                raise self.error(
                    f"{key}[{index}]", f"must be a point [x, y], got {item!r}"
                )
            result.append(tuple(float(c) for c in item))
        return result

    def numbers(self, key: str, default: Any = _MISSING) -> List[float]:
        value = self.raw(key, default)
        if not isinstance(value, (list, tuple)) or not all(
            isinstance(c, (int, float)) and not isinstance(c, bool) for c in value
        ):
            raise self.error(key, f"must be a list of numbers, got {value!r}")
        return [float(c) for c in value]


@attrs.frozen
class GeometrySpec:
    kind: str = attrs.field(validator=attrs.validators.in_(GEOMETRY_KINDS))
    radius: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    coefficients: Optional[Tuple[float, ...]] = None

    def to_curve(self) -> BoundaryCurve:
        if self.kind == "circle":
            assert self.radius is not None
            return make_circle(self.radius)
        if self.kind == "ellipse":
            assert self.a is not None and self.b is not None
            return make_ellipse(self.a, self.b)
        if self.kind == "kite":
            return make_kite()
        assert self.coefficients is not None
        return make_fourier(self.coefficients)

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {"kind": self.kind}
        for key in ("radius", "a", "b"):
            if getattr(self, key) is not None:
                result[key] = getattr(self, key)
        if self.coefficients is not None:
            result["coefficients"] = list(self.coefficients)
        return result


@attrs.frozen
class OutputSpec:
    directory: str = "."
    farfield_directions: int = 360
    field_grid: Optional[GridSpec] = None

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "directory": self.directory,
            "farfield_directions": self.farfield_directions,
        }
        if self.field_grid is not None:
            result["field_grid"] = self.field_grid.to_dict()
        return result


@attrs.frozen
class VerifySpec:
    points: Tuple[Tuple[float, ...], ...] = (
        (3.0, 1.0),
        (-2.5, 2.0),
        (0.0, -3.0),
        (3.5, -1.5),
        (-3.0, -1.0),
    )
    source: Tuple[float, ...] = (3.0, 1.0)
    directions: Tuple[float, ...] = (0.4, 2.1)
    radii: Tuple[float, ...] = (20.0, 40.0, 80.0)
    tolerance_multi: float = MULTI_SOLVE_TOLERANCE
    tolerance_single: float = SOLVER_TOLERANCE
    tolerance_oracle: float = ORACLE_TOLERANCE

    def to_dict(self) -> Dict[str, Any]:
        result = attrs.asdict(self)
        result["points"] = [list(p) for p in self.points]
        for key in ("source", "directions", "radii"):
            result[key] = list(result[key])
        return result


@attrs.frozen
class RunConfig:
    geometry: GeometrySpec
    solver: SolverConfig
    incident: IncidentField
    output: OutputSpec = OutputSpec()
    verify: VerifySpec = VerifySpec()

    def to_dict(self) -> Dict[str, Any]:
        incident = self.incident.to_dict()
        incident.pop("k")
        return {
            "geometry": self.geometry.to_dict(),
            "solver": self.solver.to_dict(),
            "incident": incident,
            "output": self.output.to_dict(),
            "verify": self.verify.to_dict(),
        }


def _geometry(section: _Section) -> GeometrySpec:
    section.check_keys(("kind", "radius", "a", "b", "coefficients"))
    kind = section.choice("kind", GEOMETRY_KINDS)
    if kind == "circle":
        spec = GeometrySpec(kind, radius=section.number("radius", positive=True))
    elif kind == "ellipse":
        spec = GeometrySpec(
            kind,
            a=section.number("a", positive=True),
            b=section.number("b", positive=True),
        )
    elif kind == "fourier":
        spec = GeometrySpec(kind, coefficients=tuple(section.numbers("coefficients")))
    else:
        spec = GeometrySpec(kind)
    try:
        spec.to_curve()
    except GeometryError as exc:
        raise section.error("kind", str(exc))
    return spec


def _solver(section: _Section, workers: int) -> SolverConfig:
    section.check_keys(("k", "eta", "n"))
    k = section.number("k", positive=True)
    if "eta" not in section.data or section.data["eta"] is None:
        logger.info("solver.eta is not set, using η = 1")
    eta = section.number("eta", 1.0)
    if eta == 0:
        raise section.error(
            "eta", "must be non-zero, the system loses injectivity at η = 0"
        )
    n = section.integer("n", 64, minimum=8)
    return SolverConfig(k=k, eta=eta, n=n, workers=workers)


def _incident(section: _Section, k: float, curve: BoundaryCurve) -> IncidentField:
    section.check_keys(("kind", "direction", "source", "amplitude"))
    kind = IncidentKind(
        section.choice("kind", [kind.value for kind in IncidentKind], "planewave-k")
    )
    amplitude: complex
    if isinstance(section.data.get("amplitude"), (list, tuple)):
        amplitude = complex(*section.vector("amplitude"))
    else:
        amplitude = section.number("amplitude", 1.0)
    if kind.is_planewave:
        raw = section.raw("direction", 0.0)
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            direction: Any = section.number("direction")
        else:
            direction = section.vector("direction")
        try:
            return IncidentField(kind, k, direction=direction, amplitude=amplitude)
        except IncidentFieldError as exc:
            raise section.error("direction", str(exc))
    source = section.vector("source")
    point = np.asarray(source, dtype=np.float64)[None, :]
    if contains(curve, point)[0] or distance_to_curve(curve, point)[0] < 1e-8:
        raise section.error("source", "must lie outside the obstacle")
    return IncidentField(kind, k, source=source, amplitude=amplitude)


def _output(section: _Section) -> OutputSpec:
    section.check_keys(("directory", "farfield_directions", "field_grid"))
    directory = section.raw("directory", ".")
    if not isinstance(directory, str):
        raise section.error("directory", f"must be a path, got {directory!r}")
    field_grid = None
    if section.data.get("field_grid") is not None:
        grid_section = _Section(
            f"{section.name}.field_grid", section.data["field_grid"], section.lines
        )
        grid_section.check_keys(("xmin", "xmax", "ymin", "ymax", "nx", "ny"))
        field_grid = GridSpec(
            xmin=grid_section.number("xmin"),
            xmax=grid_section.number("xmax"),
            ymin=grid_section.number("ymin"),
            ymax=grid_section.number("ymax"),
            nx=grid_section.integer("nx", 101),
            ny=grid_section.integer("ny", 101),
        )
    return OutputSpec(
        directory=directory,
        farfield_directions=section.integer("farfield_directions", 360),
        field_grid=field_grid,
    )


def _verify(section: _Section) -> VerifySpec:
    defaults = VerifySpec()
    section.check_keys(
        (
            "points",
            "source",
            "directions",
            "radii",
            "tolerance_multi",
            "tolerance_single",
            "tolerance_oracle",
        )
    )
    directions = section.numbers("directions", list(defaults.directions))
    if len(directions) < 2:
        raise section.error("directions", "needs two angles")
    radii = section.numbers("radii", list(defaults.radii))
    if len(radii) < 2 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise section.error("radii", "needs at least two increasing radii")
    return VerifySpec(
        points=tuple(section.vectors("points", list(defaults.points))),
        source=section.vector("source", default=defaults.source),
        directions=tuple(directions),
        radii=tuple(radii),
        tolerance_multi=section.number(
            "tolerance_multi", defaults.tolerance_multi, positive=True
        ),
        tolerance_single=section.number(
            "tolerance_single", defaults.tolerance_single, positive=True
        ),
        tolerance_oracle=section.number(
            "tolerance_oracle", defaults.tolerance_oracle, positive=True
        ),
    )


def parse_config(
    data: Any, lines: Optional[Mapping[str, int]] = None, workers: int = 1
) -> RunConfig:
    """Validates a decoded document and fills in defaults."""
    lines = lines or {}
    if not isinstance(data, dict):
        raise ConfigError("<document>", "must be a mapping of sections")
    for key in data:
        if key not in SECTIONS:
            raise ConfigError(
                str(key),
                f"unknown section, expected one of {', '.join(SECTIONS)}",
                lines.get(str(key)),
            )
    if "solver" not in data:
        raise ConfigError("solver", "is required")
    if "geometry" not in data:
        raise ConfigError("geometry", "is required")
    solver = _solver(_Section("solver", data["solver"], lines), workers)
    geometry = _geometry(_Section("geometry", data["geometry"], lines))
    incident_section = _Section("incident", data.get("incident"), lines)
    return RunConfig(
        geometry=geometry,
        solver=solver,
        incident=_incident(incident_section, solver.k, geometry.to_curve()),
        output=_output(_Section("output", data.get("output"), lines)),
        verify=_verify(_Section("verify", data.get("verify"), lines)),
    )


def load_config(path: str | pathlib.Path, workers: int = 1) -> RunConfig:
    """Reads a configuration file, or the metadata file of a previous run."""
    path = pathlib.Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot be read: {exc.strerror}")
    try:
        data = yaml.safe_load(text)
        lines = _node_lines(yaml.compose(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(
            str(path), "is not valid YAML or JSON", mark.line + 1 if mark else None
        )
    if isinstance(data, dict) and "config" in data and "solver" not in data:
        logger.info("Reading the configuration embedded in %s", path)
        data = data["config"]
        lines = {
            key[len("config.") :]: line
            for key, line in lines.items()
            if key.startswith("config.")
        }
    return parse_config(data, lines, workers=workers)
