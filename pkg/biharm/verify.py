# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Executable identities every scattered field has to satisfy.

Each check compares pairs of numbers computed along independent routes and
returns a :py:class:`CheckReport`. Single-solve checks work on one set of
densities (or on the series oracle); reciprocity and symmetry checks solve
several problems on the same factorised system.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray

from .bie import (
    DensityPair,
    SolverConfig,
    SystemMatrix,
    assemble,
    rhs_from_incident,
    solve,
)
from .fields import BoundaryTraces, boundary_traces, evaluate, farfield
from .geometry import BoundaryCurve
from .incident import IncidentField, IncidentKind
from .kernels import (
    biharm_g,
    biharm_grad_g,
    biharm_grad_lap_g,
    biharm_lap_g,
    farfield_constants,
    pairwise,
)
from .oracle import ModeCoefficients, disk_eval, disk_traces, mode_series
from .progressbar import ProgressBarInit, no_progressbar

logger = logging.getLogger(__name__)

MULTI_SOLVE_TOLERANCE = 1e-5
SOLVER_TOLERANCE = 1e-6
ORACLE_TOLERANCE = 1e-8
SCALE_FLOOR = 1e-12

CHECK_IDS = (
    "representation",
    "energy",
    "flux",
    "reciprocity-pointsource",
    "reciprocity-farfield",
    "symmetry",
    "radiation",
)


class EntryKind(enum.Enum):
    IDENTITY = "identity"
    BOUND = "bound"
    DECREASE = "decrease"


@attrs.frozen
class CheckEntry:
    """One comparison.

    An identity passes when ``left`` and ``right`` agree to the relative
    tolerance (absolute when both are below ``1e-12``); a bound passes when
    ``left <= right + tolerance`` on real parts, a decrease only when
    ``left < right`` strictly."""

    label: str
    left: complex = attrs.field(converter=complex)
    right: complex = attrs.field(converter=complex)
    tolerance: float
    kind: EntryKind = EntryKind.IDENTITY

    @property
    def abs_residual(self) -> float:
        return abs(self.left - self.right)

    @property
    def rel_residual(self) -> float:
        scale = max(abs(self.left), abs(self.right))
        if scale < SCALE_FLOOR:
            return self.abs_residual
        return self.abs_residual / scale

    @property
    def passed(self) -> bool:
        if self.kind is EntryKind.BOUND:
            return self.left.real <= self.right.real + self.tolerance
        if self.kind is EntryKind.DECREASE:
            return self.left.real < self.right.real
        return self.rel_residual <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "kind": self.kind.value,
            "left": [self.left.real, self.left.imag],
            "right": [self.right.real, self.right.imag],
            "abs_residual": self.abs_residual,
            "rel_residual": self.rel_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@attrs.frozen
class CheckReport:
    check_id: str
    inputs_digest: str
    entries: Tuple[CheckEntry, ...] = attrs.field(converter=tuple)

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def max_rel_residual(self) -> float:
        identities = [
            e.rel_residual for e in self.entries if e.kind is EntryKind.IDENTITY
        ]
        return max(identities, default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check_id": self.check_id,
            "inputs_digest": self.inputs_digest,
            "passed": self.passed,
            "entries": [entry.to_dict() for entry in self.entries],
        }


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, np.generic):
        return value.item()
    return value


def inputs_digest(inputs: Dict[str, Any]) -> str:
    """A stable hash of the parameters a check ran with."""
    text = json.dumps(_jsonable(inputs), sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def _densities_inputs(densities: DensityPair) -> Dict[str, Any]:
    return {
        "k": densities.k,
        "eta": densities.eta,
        "n": densities.grid.n,
        "curve": densities.grid.curve.describe(),
        "phi": densities.phi,
        "psi": densities.psi,
    }


def _unit(direction) -> NDArray[np.float64]:
    if np.isscalar(direction):
        return np.array([np.cos(direction), np.sin(direction)])
    vector = np.asarray(direction, dtype=np.float64)
    return vector / np.linalg.norm(vector)


def representation_integral(
    traces: BoundaryTraces, k: float, points: ArrayLike
) -> NDArray[np.complex128]:
    """``-∫ (u ∂_ν ΔG + Δu ∂_ν G - G ∂_ν Δu - ΔG ∂_ν u) ds`` at exterior points.

    ``G`` and ``ΔG`` are taken at ``|x - y|`` and differentiated in ``y``."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    dim = points.shape[-1]
    x, y = points[:, None, :], traces.points[None, :, :]
    _, r = pairwise(x, y)
    n_y = traces.normals[None, :, :]
    # gradients are taken in x; the y-derivative flips their sign
    dn_g = -np.sum(biharm_grad_g(k, x, y) * n_y, axis=-1)
    dn_lap_g = -np.sum(biharm_grad_lap_g(k, x, y) * n_y, axis=-1)
    g = biharm_g(k, r, dim)
    lap_g = biharm_lap_g(k, r, dim)
    integrand = (
        traces.u * dn_lap_g
        + traces.lap_u * dn_g
        - g * traces.dn_lap_u
        - lap_g * traces.dn_u
    )
    return -(integrand @ traces.weights)


def check_representation(
    densities: DensityPair,
    points: ArrayLike,
    tolerance: float = SOLVER_TOLERANCE,
) -> CheckReport:
    """Field from the densities against the Green representation built on
    the boundary traces of the same densities."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    direct = evaluate(densities, points).u
    traces = boundary_traces(densities)
    represented = representation_integral(traces, densities.k, points)
    entries = [
        CheckEntry(f"u({p[0]:g}, {p[1]:g})", left, right, tolerance)
        for p, left, right in zip(points, direct, represented)
    ]
    digest = inputs_digest({**_densities_inputs(densities), "points": points})
    return CheckReport("representation", digest, entries)


def check_representation_oracle(
    coeffs: ModeCoefficients,
    points: ArrayLike,
    n_theta: int = 256,
    tolerance: float = ORACLE_TOLERANCE,
) -> CheckReport:
    """The disk series against the representation built on its own traces."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    r = np.hypot(points[:, 0], points[:, 1])
    theta = np.arctan2(points[:, 1], points[:, 0])
    direct = disk_eval(coeffs, r, theta)[0]
    represented = representation_integral(
        disk_traces(coeffs, n_theta), coeffs.k, points
    )
    entries = [
        CheckEntry(f"u({p[0]:g}, {p[1]:g})", left, right, tolerance)
        for p, left, right in zip(points, direct, represented)
    ]
    digest = inputs_digest(
        {**coeffs.to_dict(), "a": coeffs.a, "b": coeffs.b, "points": points}
    )
    return CheckReport("representation", digest, entries)


def farfield_energy(
    ff_minus: ArrayLike, weights: Optional[ArrayLike] = None
) -> float:
    """``∫ |u_{-,∞}|² ds`` over the unit sphere.

    Without weights the samples are taken as equispaced angles on the circle."""
    values = np.abs(np.asarray(ff_minus)) ** 2
    if weights is None:
        return float(2 * np.pi * np.mean(values))
    return float(np.sum(np.asarray(weights) * values))


def check_energy(
    traces: BoundaryTraces,
    k: float,
    farfield_norm: Optional[float] = None,
    tolerance: float = ORACLE_TOLERANCE,
) -> CheckReport:
    """Boundary energy identities of a scattered field.

    The entries are the identity
    ``k² Im∫(u ∂_ν Δū + Δu ∂_ν ū) = -Im∫(Δu ∂_ν Δū + k⁴ u ∂_ν ū)``, the sign
    condition ``-2k Im∫(Δu ∂_ν Δū + k⁴ u ∂_ν ū) >= 0`` and, given
    ``farfield_norm = ∫|u_{-,∞}|²``, the balance of that outgoing flux
    against ``k² ∫|u_{-,∞}|²``."""
    mixed = traces.integrate(
        traces.u * np.conj(traces.dn_lap_u) + traces.lap_u * np.conj(traces.dn_u)
    ).imag
    flux = traces.integrate(
        traces.lap_u * np.conj(traces.dn_lap_u) + k**4 * traces.u * np.conj(traces.dn_u)
    ).imag
    outgoing = -2 * k * flux
    entries = [
        CheckEntry("k² Im<u, Δu>", k**2 * mixed, -flux, tolerance),
        CheckEntry("outgoing flux sign", 0.0, outgoing, 1e-10, EntryKind.BOUND),
    ]
    if farfield_norm is not None:
        entries.append(
            CheckEntry("far-field balance", outgoing, k**2 * farfield_norm, tolerance)
        )
    digest = inputs_digest(
        {"k": k, "u": traces.u, "lap_u": traces.lap_u, "farfield": farfield_norm}
    )
    return CheckReport("energy", digest, entries)


def _radial_data(source, r: NDArray, theta: NDArray):
    """``(u, Δu, ∂_r u, ∂_r Δu)`` at polar points for densities or series."""
    if isinstance(source, ModeCoefficients):
        return mode_series(source, r, theta)
    points = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    values = evaluate(source, points, gradient=True)
    radial = points / r[:, None]
    return (
        values.u,
        values.lap_u,
        np.sum(values.grad_u * radial, axis=-1),
        np.sum(values.grad_lap_u * radial, axis=-1),
    )


def check_flux(
    densities: DensityPair,
    radius: float,
    n_theta: int = 512,
    tolerance: float = SOLVER_TOLERANCE,
) -> CheckReport:
    """``Im∫(Δu ∂_ν Δū + k⁴ u ∂_ν ū)`` on the boundary and on the circle
    ``|x| = radius`` enclosing it."""
    k = densities.k
    traces = boundary_traces(densities)
    inner = traces.integrate(
        traces.lap_u * np.conj(traces.dn_lap_u) + k**4 * traces.u * np.conj(traces.dn_u)
    ).imag
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    u, lap_u, dr_u, dr_lap_u = _radial_data(densities, np.full(n_theta, radius), theta)
    outer = (
        2
        * np.pi
        * radius
        / n_theta
        * np.sum(lap_u * np.conj(dr_lap_u) + k**4 * u * np.conj(dr_u))
    ).imag
    digest = inputs_digest({**_densities_inputs(densities), "radius": radius})
    return CheckReport(
        "flux",
        digest,
        [CheckEntry(f"flux through |x|={radius:g}", outer, inner, tolerance)],
    )


def check_radiation(
    source: DensityPair | ModeCoefficients,
    radii: Sequence[float] = (20.0, 40.0, 80.0),
    n_directions: int = 64,
) -> CheckReport:
    """``max_θ r^{(d-1)/2} |∂_r w - ik w|`` must strictly decrease along ``radii`` for
    ``w = u`` and ``w = Δu``."""
    if isinstance(source, ModeCoefficients):
        dim, k = source.dim, source.k
        span = np.pi if dim == 3 else 2 * np.pi
        inputs = {**source.to_dict(), "a": source.a, "b": source.b}
    else:
        dim, k = 2, source.k
        span = 2 * np.pi
        inputs = _densities_inputs(source)
    theta = span * np.arange(n_directions) / n_directions
    defects: Dict[str, List[float]] = {"u": [], "Δu": []}
    for radius in radii:
        r = np.full(n_directions, float(radius))
        u, lap_u, dr_u, dr_lap_u = _radial_data(source, r, theta)
        scale = radius ** ((dim - 1) / 2)
        defects["u"].append(float(np.max(scale * np.abs(dr_u - 1j * k * u))))
        defects["Δu"].append(float(np.max(scale * np.abs(dr_lap_u - 1j * k * lap_u))))
    entries = [
        CheckEntry(
            f"{name} r={radii[i + 1]:g} vs r={radii[i]:g}",
            values[i + 1],
            values[i],
            0.0,
            EntryKind.DECREASE,
        )
        for name, values in defects.items()
        for i in range(len(radii) - 1)
    ]
    digest = inputs_digest({**inputs, "radii": list(radii)})
    return CheckReport("radiation", digest, entries)


class _Problems:
    """Solves several incident fields on one factorised system."""

    def __init__(
        self,
        curve: BoundaryCurve,
        cfg: SolverConfig,
        mat: Optional[SystemMatrix],
        progressbar: ProgressBarInit,
    ):
        self.mat = mat or assemble(curve, cfg)
        self.k = cfg.k
        self.progressbar = progressbar

    def solve_all(self, incidents: Dict[str, IncidentField]) -> Dict[str, DensityPair]:
        solutions = {}
        with self.progressbar(list(incidents.items()), label="Solving") as bar:
            for name, incident in bar:
                rhs = rhs_from_incident(incident, self.mat.grid, self.k)
                solutions[name] = solve(self.mat, rhs)
        return solutions


def _value(densities: DensityPair, point, part: str) -> complex:
    values = evaluate(densities, np.asarray(point, dtype=np.float64)[None, :])
    return complex(getattr(values, part)[0])


def _farfield(densities: DensityPair, direction, part: str) -> complex:
    pattern = farfield(densities, np.asarray(direction)[None, :])
    return complex(getattr(pattern, part)[0])


def check_reciprocity_pointsource(
    curve: BoundaryCurve,
    cfg: SolverConfig,
    y: ArrayLike,
    xhat,
    tolerance: float = MULTI_SOLVE_TOLERANCE,
    mat: Optional[SystemMatrix] = None,
    progressbar: Optional[ProgressBarInit] = None,
) -> CheckReport:
    """Plane-wave fields at a point ``y`` against far fields of point sources
    at ``y``, observed in the direction ``-x̂``."""
    k = cfg.k
    xhat = _unit(xhat)
    y = np.asarray(y, dtype=np.float64)
    solutions = _Problems(curve, cfg, mat, progressbar or no_progressbar).solve_all(
        {
            "pw-k": IncidentField(IncidentKind.PLANEWAVE_K, k, direction=xhat),
            "pw-ik": IncidentField(IncidentKind.PLANEWAVE_IK, k, direction=xhat),
            "ps-k": IncidentField(IncidentKind.POINTSOURCE_K, k, source=y),
            "ps-ik": IncidentField(IncidentKind.POINTSOURCE_IK, k, source=y),
        }
    )
    c_minus, c_plus = farfield_constants(k, 2)
    back = -xhat
    entries = [
        CheckEntry(
            "u+(y; x̂, k)",
            _value(solutions["pw-k"], y, "u_plus"),
            _farfield(solutions["ps-ik"], back, "ff_minus") / c_minus,
            tolerance,
        ),
        CheckEntry(
            "u-(y; x̂, k)",
            _value(solutions["pw-k"], y, "u_minus"),
            _farfield(solutions["ps-k"], back, "ff_minus") / c_minus,
            tolerance,
        ),
        CheckEntry(
            "u+(y; x̂, ik)",
            _value(solutions["pw-ik"], y, "u_plus"),
            _farfield(solutions["ps-ik"], back, "ff_plus") / c_plus,
            tolerance,
        ),
        CheckEntry(
            "u-(y; x̂, ik)",
            _value(solutions["pw-ik"], y, "u_minus"),
            _farfield(solutions["ps-k"], back, "ff_plus") / c_plus,
            tolerance,
        ),
    ]
    digest = inputs_digest(
        {"curve": curve.describe(), **cfg.to_dict(), "y": y, "xhat": xhat}
    )
    return CheckReport("reciprocity-pointsource", digest, entries)


def check_reciprocity_farfield(
    curve: BoundaryCurve,
    cfg: SolverConfig,
    xhat,
    yhat,
    tolerance: float = MULTI_SOLVE_TOLERANCE,
    mat: Optional[SystemMatrix] = None,
    progressbar: Optional[ProgressBarInit] = None,
) -> CheckReport:
    """Far fields of plane waves swapped between incidence and observation."""
    k = cfg.k
    xhat, yhat = _unit(xhat), _unit(yhat)
    solutions = _Problems(curve, cfg, mat, progressbar or no_progressbar).solve_all(
        {
            "y-k": IncidentField(IncidentKind.PLANEWAVE_K, k, direction=yhat),
            "y-ik": IncidentField(IncidentKind.PLANEWAVE_IK, k, direction=yhat),
            "x-k": IncidentField(IncidentKind.PLANEWAVE_K, k, direction=-xhat),
            "x-ik": IncidentField(IncidentKind.PLANEWAVE_IK, k, direction=-xhat),
        }
    )
    c_minus, c_plus = farfield_constants(k, 2)
    mixed = c_minus / c_plus
    entries = [
        CheckEntry(
            "u+∞(x̂; ŷ, k)",
            mixed * _farfield(solutions["y-k"], xhat, "ff_plus"),
            _farfield(solutions["x-ik"], -yhat, "ff_minus"),
            tolerance,
        ),
        CheckEntry(
            "u-∞(x̂; ŷ, k)",
            _farfield(solutions["y-k"], xhat, "ff_minus"),
            _farfield(solutions["x-k"], -yhat, "ff_minus"),
            tolerance,
        ),
        CheckEntry(
            "u+∞(x̂; ŷ, ik)",
            _farfield(solutions["y-ik"], xhat, "ff_plus"),
            _farfield(solutions["x-ik"], -yhat, "ff_plus"),
            tolerance,
        ),
        CheckEntry(
            "u-∞(x̂; ŷ, ik)",
            _farfield(solutions["y-ik"], xhat, "ff_minus"),
            mixed * _farfield(solutions["x-k"], -yhat, "ff_plus"),
            tolerance,
        ),
    ]
    digest = inputs_digest(
        {"curve": curve.describe(), **cfg.to_dict(), "xhat": xhat, "yhat": yhat}
    )
    return CheckReport("reciprocity-farfield", digest, entries)


def check_symmetry(
    curve: BoundaryCurve,
    cfg: SolverConfig,
    x: ArrayLike,
    y: ArrayLike,
    tolerance: float = MULTI_SOLVE_TOLERANCE,
    mat: Optional[SystemMatrix] = None,
    progressbar: Optional[ProgressBarInit] = None,
) -> CheckReport:
    """Point-source fields with source and receiver exchanged."""
    k = cfg.k
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    solutions = _Problems(curve, cfg, mat, progressbar or no_progressbar).solve_all(
        {
            "y-k": IncidentField(IncidentKind.POINTSOURCE_K, k, source=y),
            "y-ik": IncidentField(IncidentKind.POINTSOURCE_IK, k, source=y),
            "x-k": IncidentField(IncidentKind.POINTSOURCE_K, k, source=x),
            "x-ik": IncidentField(IncidentKind.POINTSOURCE_IK, k, source=x),
        }
    )
    entries = [
        CheckEntry(
            "u+(x; y, k)",
            _value(solutions["y-k"], x, "u_plus"),
            _value(solutions["x-ik"], y, "u_minus"),
            tolerance,
        ),
        CheckEntry(
            "u-(x; y, k)",
            _value(solutions["y-k"], x, "u_minus"),
            _value(solutions["x-k"], y, "u_minus"),
            tolerance,
        ),
        CheckEntry(
            "u+(x; y, ik)",
            _value(solutions["y-ik"], x, "u_plus"),
            _value(solutions["x-ik"], y, "u_plus"),
            tolerance,
        ),
        CheckEntry(
            "u-(x; y, ik)",
            _value(solutions["y-ik"], x, "u_minus"),
            _value(solutions["x-k"], y, "u_plus"),
            tolerance,
        ),
    ]
    digest = inputs_digest({"curve": curve.describe(), **cfg.to_dict(), "x": x, "y": y})
    return CheckReport("symmetry", digest, entries)


def summarize(reports: Iterable[CheckReport]) -> str:
    """A terminal table with one row per entry."""
    from tabulate import tabulate

    rows = [
        (
            report.check_id,
            entry.label,
            f"{entry.rel_residual:.2e}" if entry.kind is EntryKind.IDENTITY else "",
            f"{entry.tolerance:.0e}",
            "ok" if entry.passed else "FAILED",
        )
        for report in reports
        for entry in report.entries
    ]
    return tabulate(
        rows,
        headers=("check", "entry", "residual", "tolerance", "result"),
        disable_numparse=True,
    )
