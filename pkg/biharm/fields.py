# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Scattered fields, boundary traces and far-field patterns from densities.

The scattered field splits into a radiating Helmholtz part
``u_- = Δu - k²u`` and an evanescent modified part ``u_+ = Δu + k²u``, so
that ``u = (u_+ - u_-)/(2k²)`` and ``Δu = (u_+ + u_-)/2``.
"""

from __future__ import annotations

import logging
from typing import Any, Dict, List, NamedTuple, Optional

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray

from .bie import (
    DensityPair,
    Operator,
    SolverConfig,
    discretize_op,
    hypersingular,
)
from .geometry import BoundaryCurve, contains, distance_to_curve
from .incident import eval_incident  # noqa: F401
from .kernels import (
    WaveNumber,
    dphi_radial,
    ff_kernel_minus,
    ff_kernel_plus,
    hess_radial,
    phi_radial,
)
from .progressbar import ProgressBarInit, no_progressbar

logger = logging.getLogger(__name__)

EVALUATED, INTERIOR, NEAR_BOUNDARY = 0, 1, 2
POINT_BLOCK = 512


class NearBoundaryError(ValueError):
    def __init__(self, point, distance: float, minimum: float):
        self.point = tuple(float(c) for c in point)
        self.distance = distance
        self.minimum = minimum

    def __str__(self) -> str:
        if self.distance < 0:
            return f"point {self.point} lies inside the obstacle"
        return (
            f"point {self.point} is {self.distance:.3e} away from the boundary, "
            f"closer than the evaluation limit {self.minimum:.3e}"
        )


@attrs.frozen
class FieldSample:
    point: tuple
    u_plus: complex
    u_minus: complex
    u: complex
    lap_u: complex
    mask: int = EVALUATED


@attrs.frozen(eq=False)
class FarFieldPair:
    """Far-field patterns of ``u_-`` and ``u_+`` on a set of directions.

    ``angles`` is the polar angle of each direction (in 3D, measured from
    the symmetry axis)."""

    angles: NDArray[np.float64]
    directions: NDArray[np.float64]
    ff_minus: NDArray[np.complex128]
    ff_plus: NDArray[np.complex128]


@attrs.frozen(eq=False)
class BoundaryTraces:
    """Exterior Cauchy data of a scattered field on boundary nodes.

    ``weights`` integrate with respect to surface measure."""

    points: NDArray[np.float64]
    normals: NDArray[np.float64]
    weights: NDArray[np.float64]
    u: NDArray[np.complex128]
    lap_u: NDArray[np.complex128]
    dn_u: NDArray[np.complex128]
    dn_lap_u: NDArray[np.complex128]

    def integrate(self, values: ArrayLike) -> complex:
        return complex(np.sum(self.weights * np.asarray(values)))


class FieldValues(NamedTuple):
    k: float
    u_plus: NDArray[np.complex128]
    u_minus: NDArray[np.complex128]
    grad_u_plus: Optional[NDArray[np.complex128]] = None
    grad_u_minus: Optional[NDArray[np.complex128]] = None

    @property
    def u(self) -> NDArray[np.complex128]:
        return (self.u_plus - self.u_minus) / (2 * self.k**2)

    @property
    def lap_u(self) -> NDArray[np.complex128]:
        return (self.u_plus + self.u_minus) / 2

    @property
    def grad_u(self) -> NDArray[np.complex128]:
        assert self.grad_u_plus is not None and self.grad_u_minus is not None
        return (self.grad_u_plus - self.grad_u_minus) / (2 * self.k**2)

    @property
    def grad_lap_u(self) -> NDArray[np.complex128]:
        assert self.grad_u_plus is not None and self.grad_u_minus is not None
        return (self.grad_u_plus + self.grad_u_minus) / 2


@attrs.frozen
class GridSpec:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int = attrs.field(validator=attrs.validators.ge(1))
    ny: int = attrs.field(validator=attrs.validators.ge(1))

    def points(self) -> NDArray[np.float64]:
        xs = np.linspace(self.xmin, self.xmax, self.nx)
        ys = np.linspace(self.ymin, self.ymax, self.ny)
        xx, yy = np.meshgrid(xs, ys, indexing="xy")
        return np.stack([xx.ravel(), yy.ravel()], axis=-1)

    def to_dict(self) -> Dict[str, Any]:
        return attrs.asdict(self)


def _layer_potential(
    b: WaveNumber,
    densities: DensityPair,
    single: NDArray[np.complex128],
    points: NDArray[np.float64],
    gradient: bool,
):
    g = densities.grid
    d = points[:, None, :] - g.points[None, :, :]
    r = np.hypot(d[..., 0], d[..., 1])
    weighted_single = g.weights * single
    weighted_double = g.weights * densities.psi
    dn = np.sum(d * g.normals[None, :, :], axis=-1)
    phi = phi_radial(b, r)
    dphi = dphi_radial(b, r)
    double_kernel = -dphi * dn / r
    value = phi @ weighted_single - double_kernel @ weighted_double
    if not gradient:
        return value, None
    grad_single = (dphi / r)[..., None] * d
    grad_double = -(hess_radial(b, r) * dn / r**2)[..., None] * d - (dphi / r)[
        ..., None
    ] * g.normals[None, :, :]
    grad = np.einsum("mnc,n->mc", grad_single, weighted_single) - np.einsum(
        "mnc,n->mc", grad_double, weighted_double
    )
    return value, grad


def evaluate(
    densities: DensityPair, points: ArrayLike, gradient: bool = False
) -> FieldValues:
    """Scattered field at exterior points, away from the boundary.

    No distance screening happens here; see :py:func:`eval_scattered`."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    k = densities.k
    plus_parts, minus_parts = [], []
    for start in range(0, len(points), POINT_BLOCK):
        block = points[start : start + POINT_BLOCK]
        plus_parts.append(
            _layer_potential(
                WaveNumber.modified(k), densities, densities.phi_plus, block, gradient
            )
        )
        minus_parts.append(
            _layer_potential(
                WaveNumber.helmholtz(k), densities, densities.phi, block, gradient
            )
        )
    u_plus = np.concatenate([value for value, _ in plus_parts])
    u_minus = np.concatenate([value for value, _ in minus_parts])
    grad_plus = grad_minus = None
    if gradient:
        grad_plus = np.concatenate([grad for _, grad in plus_parts])
        grad_minus = np.concatenate([grad for _, grad in minus_parts])
    return FieldValues(
        k=k,
        u_plus=u_plus,
        u_minus=u_minus,
        grad_u_plus=grad_plus,
        grad_u_minus=grad_minus,
    )


def _screen(densities: DensityPair, curve: BoundaryCurve, points: NDArray) -> NDArray:
    mask = np.full(len(points), EVALUATED)
    inside = contains(curve, points)
    mask[inside] = INTERIOR
    distance = distance_to_curve(curve, points)
    mask[~inside & (distance <= densities.grid.exclusion_distance)] = NEAR_BOUNDARY
    return mask


def eval_scattered(
    densities: DensityPair, curve: BoundaryCurve, cfg: SolverConfig, x: ArrayLike
) -> FieldSample:
    """The scattered field at one exterior point ``x``.

    ``cfg`` must be the configuration the densities were solved with."""
    if (
        cfg.n != densities.grid.n
        or not np.isclose(cfg.k, densities.k)
        or cfg.eta != densities.eta
    ):
        raise ValueError(
            f"densities were solved with k={densities.k:g}, eta={densities.eta:g}, "
            f"n={densities.grid.n}, not with {cfg.to_dict()}"
        )
    point = np.asarray(x, dtype=np.float64)
    mask = _screen(densities, curve, point[None, :])[0]
    if mask != EVALUATED:
        distance = float(distance_to_curve(curve, point[None, :])[0])
        raise NearBoundaryError(
            point,
            -distance if mask == INTERIOR else distance,
            densities.grid.exclusion_distance,
        )
    values = evaluate(densities, point[None, :])
    return FieldSample(
        point=tuple(float(c) for c in point),
        u_plus=complex(values.u_plus[0]),
        u_minus=complex(values.u_minus[0]),
        u=complex(values.u[0]),
        lap_u=complex(values.lap_u[0]),
    )


def directions_from_angles(angles: ArrayLike) -> NDArray[np.float64]:
    angles = np.atleast_1d(np.asarray(angles, dtype=np.float64))
    return np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def farfield(densities: DensityPair, directions: ArrayLike) -> FarFieldPair:
    """Far-field patterns for the given angles or unit vectors."""
    directions = np.asarray(directions, dtype=np.float64)
    if directions.ndim <= 1:
        angles = np.atleast_1d(directions)
        directions = directions_from_angles(angles)
    else:
        angles = np.arctan2(directions[:, 1], directions[:, 0])
    g = densities.grid
    k = densities.k
    dn_minus, minus = ff_kernel_minus(k, directions, g.points, g.normals)
    dn_plus, plus = ff_kernel_plus(k, directions, g.points, g.normals)
    ff_minus = minus @ (g.weights * densities.phi) - dn_minus @ (
        g.weights * densities.psi
    )
    ff_plus = plus @ (g.weights * densities.phi_plus) - dn_plus @ (
        g.weights * densities.psi
    )
    return FarFieldPair(
        angles=angles, directions=directions, ff_minus=ff_minus, ff_plus=ff_plus
    )


def field_grid(
    densities: DensityPair,
    curve: BoundaryCurve,
    spec: GridSpec,
    progressbar: Optional[ProgressBarInit] = None,
) -> List[FieldSample]:
    """Samples on a rectangular grid, row by row.

    Points inside the obstacle or within the exclusion band are returned
    with a non-zero ``mask`` and NaN values."""
    progressbar = progressbar or no_progressbar
    points = spec.points()
    mask = _screen(densities, curve, points)
    nan = complex(np.nan, np.nan)
    u_plus = np.full(len(points), nan)
    u_minus = np.full(len(points), nan)
    rows = np.array_split(np.arange(len(points)), spec.ny)
    with progressbar(rows, label="Evaluating field grid") as bar:
        for row in bar:
            selected = row[mask[row] == EVALUATED]
            if len(selected):
                values = evaluate(densities, points[selected])
                u_plus[selected] = values.u_plus
                u_minus[selected] = values.u_minus
    k2 = densities.k**2
    return [
        FieldSample(
            point=(float(p[0]), float(p[1])),
            u_plus=complex(up),
            u_minus=complex(um),
            u=complex((up - um) / (2 * k2)),
            lap_u=complex((up + um) / 2),
            mask=int(m),
        )
        for p, up, um, m in zip(points, u_plus, u_minus, mask)
    ]


def boundary_traces(densities: DensityPair) -> BoundaryTraces:
    """Exterior traces of ``u``, ``Δu`` and their normal derivatives.

    Single layers are continuous, double layers jump by ``+ψ/2`` and the
    normal derivative of a single layer by ``-φ/2``."""
    g = densities.grid
    k = densities.k
    helmholtz, modified = WaveNumber.helmholtz(k), WaveNumber.modified(k)
    phi, psi, phi_plus = densities.phi, densities.psi, densities.phi_plus

    def branch_traces(b: WaveNumber, single_density):
        single = discretize_op(Operator.SINGLE_LAYER, b, g)
        double = discretize_op(Operator.DOUBLE_LAYER, b, g)
        adjoint = discretize_op(Operator.ADJOINT_DOUBLE_LAYER, b, g)
        value = single @ single_density - double @ psi - 0.5 * psi
        normal = (
            adjoint @ single_density - 0.5 * single_density - hypersingular(b, g) @ psi
        )
        return value, normal

    u_plus, dn_u_plus = branch_traces(modified, phi_plus)
    u_minus, dn_u_minus = branch_traces(helmholtz, phi)
    return BoundaryTraces(
        points=g.points,
        normals=g.normals,
        weights=g.weights,
        u=(u_plus - u_minus) / (2 * k**2),
        lap_u=(u_plus + u_minus) / 2,
        dn_u=(dn_u_plus - dn_u_minus) / (2 * k**2),
        dn_lap_u=(dn_u_plus + dn_u_minus) / 2,
    )
