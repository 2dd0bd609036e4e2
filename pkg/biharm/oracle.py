# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Closed-form scattering by a disk and by a ball, by separation of variables.

Outside a disk of radius ``R`` the scattered field of a plane wave is the
mode series ``Σ (a_m H_m(kr) + b_m K_m(kr)) e^{imθ}``. Each mode carries a
2×2 system expressing ``u^s = -u^i`` and ``∂_r u^s = -∂_r u^i`` at ``r = R``.
The ball is handled the same way with spherical functions and Legendre
polynomials, the incident direction being the symmetry axis.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Dict, Tuple

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray
import scipy.special

from .fields import BoundaryTraces, FarFieldPair
from .incident import IncidentKind
from .specfun import (
    bessel_i,
    bessel_j,
    deriv,
    hankel1,
    macdonald_k,
    spherical_h1,
    spherical_i,
    spherical_j,
    spherical_k,
)

logger = logging.getLogger(__name__)

MAX_ORDER = 120
ORDER_STEP = 8
TAIL_TOLERANCE = 1e-14
MODE_RESIDUAL_TOLERANCE = 1e-13
# Largest kR for which K_m stays within double precision.
MAX_SIZE_PARAMETER = 300.0


class OracleError(ValueError):
    pass


@attrs.frozen(eq=False)
class ModeCoefficients:
    """Coefficients ``a`` (radiating basis) and ``b`` (evanescent basis).

    In 2D, ``orders`` runs over ``-M..M``; in 3D over ``0..L``."""

    dim: int
    k: float
    radius: float
    orders: NDArray[np.int64]
    a: NDArray[np.complex128]
    b: NDArray[np.complex128]

    @property
    def truncation(self) -> int:
        return int(np.max(np.abs(self.orders)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "k": self.k,
            "radius": self.radius,
            "truncation": self.truncation,
        }


@attrs.frozen
class DiskProblem:
    radius: float = attrs.field(converter=float)
    k: float = attrs.field(converter=float)
    angle: float = attrs.field(default=0.0, converter=float)
    kind: IncidentKind = attrs.field(
        default=IncidentKind.PLANEWAVE_K, converter=IncidentKind
    )
    amplitude: complex = attrs.field(default=1.0, converter=complex)

    @radius.validator
    def _check_radius(self, attribute, value):
        if not value > 0:
            raise OracleError(f"radius must be positive, got {value!r}")

    @k.validator
    def _check_k(self, attribute, value):
        if not value > 0:
            raise OracleError(f"wave number must be positive, got {value!r}")
        if value * self.radius >= MAX_SIZE_PARAMETER:
            raise OracleError(
                f"kR = {value * self.radius:g} must stay below {MAX_SIZE_PARAMETER:g}"
            )

    @kind.validator
    def _check_kind(self, attribute, value):
        if not value.is_planewave:
            raise OracleError("the series oracle only handles plane waves")


def _incident_modes(problem: DiskProblem, orders: NDArray[np.int64]):
    """Incident coefficients and radial functions (value, derivative) at kR."""
    x = problem.k * problem.radius
    phase = np.exp(-1j * orders * problem.angle)
    if problem.kind is IncidentKind.PLANEWAVE_K:
        coefficients = problem.amplitude * (1j ** (orders % 4)) * phase
        radial = np.array([bessel_j(m, x) for m in orders])
        radial_d = np.array([deriv("J", m, x) for m in orders])
    else:
        coefficients = problem.amplitude * (-1.0) ** orders * phase
        radial = np.array([bessel_i(m, x) for m in orders])
        radial_d = np.array([deriv("I", m, x) for m in orders])
    return coefficients, radial, radial_d


def _solve_modes(
    matrices: NDArray[np.complex128], rhs: NDArray[np.complex128]
) -> NDArray[np.complex128]:
    solution = np.linalg.solve(matrices, rhs[..., None])[..., 0]
    residual = np.abs(np.einsum("mij,mj->mi", matrices, solution) - rhs)
    scale = np.abs(matrices).max(axis=(1, 2)) * np.abs(solution).max(axis=1) + np.abs(
        rhs
    ).max(axis=1)
    safe_scale = np.where(scale > 0, scale, 1)
    relative = np.where(scale > 0, residual.max(axis=1) / safe_scale, 0)
    if np.any(relative > MODE_RESIDUAL_TOLERANCE):
        raise OracleError(
            f"mode system residual {float(np.max(relative)):.2e} is too large"
        )
    return solution


def disk_solve(problem: DiskProblem) -> ModeCoefficients:
    """Mode coefficients, truncated once the outermost modes fall below
    ``1e-14`` of the largest ones (or at order 120)."""
    x = problem.k * problem.radius
    order = ORDER_STEP
    while True:
        orders = np.arange(-order, order + 1)
        c, radial, radial_d = _incident_modes(problem, orders)
        matrices = np.empty((len(orders), 2, 2), dtype=np.complex128)
        for index, m in enumerate(orders):
            matrices[index] = [
                [hankel1(m, x), macdonald_k(m, x)],
                [deriv("H1", m, x), deriv("K", m, x)],
            ]
        rhs = -np.stack([c * radial, c * radial_d], axis=-1)
        solution = _solve_modes(matrices, rhs)
        a, b = solution[:, 0], solution[:, 1]
        size = np.abs(a) + np.abs(b)
        largest = float(np.max(size))
        tail = float(max(size[0], size[-1]))
        if largest == 0 or tail <= TAIL_TOLERANCE * largest:
            break
        if order >= MAX_ORDER:
            logger.warning(
                "Mode series not converged at order %d (tail %.2e)", order, tail
            )
            break
        order = min(order + ORDER_STEP, MAX_ORDER)
    logger.debug("Disk oracle truncated at order %d", order)
    return ModeCoefficients(
        dim=2, k=problem.k, radius=problem.radius, orders=orders, a=a, b=b
    )


def _radial_functions(coeffs: ModeCoefficients, r: NDArray[np.float64]):
    """Per-order radial values ``(H, H', K, K')`` at ``kr``.

    Each has shape (orders, points)."""
    x = coeffs.k * r
    if coeffs.dim == 2:
        h = np.array([hankel1(m, x) for m in coeffs.orders])
        dh = np.array([deriv("H1", m, x) for m in coeffs.orders])
        kk = np.array([macdonald_k(m, x) for m in coeffs.orders])
        dk = np.array([deriv("K", m, x) for m in coeffs.orders])
    else:
        h = np.array([spherical_h1(ell, x) for ell in coeffs.orders])
        dh = np.array([deriv("h1", ell, x) for ell in coeffs.orders])
        kk = np.array([spherical_k(ell, x) for ell in coeffs.orders])
        dk = np.array([deriv("k", ell, x) for ell in coeffs.orders])
    return h, dh, kk, dk


def _angular(coeffs: ModeCoefficients, theta: NDArray[np.float64]) -> NDArray:
    if coeffs.dim == 2:
        return np.exp(1j * np.outer(coeffs.orders, theta))
    return np.array(
        [scipy.special.eval_legendre(ell, np.cos(theta)) for ell in coeffs.orders]
    )


def mode_series(coeffs: ModeCoefficients, r: ArrayLike, theta: ArrayLike):
    """``(u, Δu, ∂_r u, ∂_r Δu)`` from the mode series, in 2D or 3D."""
    r = np.atleast_1d(np.asarray(r, dtype=np.float64))
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    r, theta = np.broadcast_arrays(r, theta)
    if np.any(r < coeffs.radius * (1 - 1e-12)):
        raise OracleError("the mode series only holds outside the obstacle")
    k = coeffs.k
    h, dh, kk, dk = _radial_functions(coeffs, r)
    angular = _angular(coeffs, theta)
    a, b = coeffs.a[:, None], coeffs.b[:, None]
    u = np.sum((a * h + b * kk) * angular, axis=0)
    lap_u = k**2 * np.sum((-a * h + b * kk) * angular, axis=0)
    dr_u = k * np.sum((a * dh + b * dk) * angular, axis=0)
    dr_lap_u = k**3 * np.sum((-a * dh + b * dk) * angular, axis=0)
    return u, lap_u, dr_u, dr_lap_u


def disk_eval(
    coeffs: ModeCoefficients, r: ArrayLike, theta: ArrayLike
) -> Tuple[NDArray, NDArray, NDArray, NDArray]:
    """``(u, Δu, ∂_r u, ∂_r Δu)`` of the scattered field at polar points."""
    if coeffs.dim != 2:
        raise OracleError("disk_eval needs two-dimensional coefficients")
    return mode_series(coeffs, r, theta)


def disk_farfield(coeffs: ModeCoefficients, directions: ArrayLike) -> FarFieldPair:
    """Far-field patterns for the given polar angles."""
    theta = np.atleast_1d(np.asarray(directions, dtype=np.float64))
    k = coeffs.k
    m = coeffs.orders[:, None]
    angular = np.exp(1j * m * theta[None, :])
    radiating = (
        -2 * k**2 * coeffs.a[:, None]
        * math.sqrt(2 / (math.pi * k))
        * np.exp(-1j * (m * math.pi / 2 + math.pi / 4))
    )
    evanescent = 2 * k**2 * coeffs.b[:, None] * math.sqrt(math.pi / (2 * k))
    return FarFieldPair(
        angles=theta,
        directions=np.stack([np.cos(theta), np.sin(theta)], axis=-1),
        ff_minus=np.sum(radiating * angular, axis=0),
        ff_plus=np.sum(evanescent * angular, axis=0),
    )


def disk_traces(coeffs: ModeCoefficients, n_theta: int = 256) -> BoundaryTraces:
    """Cauchy data on the circle ``r = R``, on ``n_theta`` trapezoid nodes."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    radius = coeffs.radius
    u, lap_u, dr_u, dr_lap_u = disk_eval(coeffs, np.full(n_theta, radius), theta)
    normals = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return BoundaryTraces(
        points=radius * normals,
        normals=normals,
        weights=np.full(n_theta, 2 * np.pi * radius / n_theta),
        u=u,
        lap_u=lap_u,
        dn_u=dr_u,
        dn_lap_u=dr_lap_u,
    )


def parseval_norm(coeffs: ModeCoefficients, r: float) -> float:
    """``∫_{|x|=r} |u^s|² ds`` from the mode coefficients."""
    h, _, kk, _ = _radial_functions(coeffs, np.array([float(r)]))
    modes = coeffs.a * h[:, 0] + coeffs.b * kk[:, 0]
    return float(2 * np.pi * r * np.sum(np.abs(modes) ** 2))


def sphere_solve(
    radius: float,
    k: float,
    kind: IncidentKind | str = IncidentKind.PLANEWAVE_K,
    amplitude: complex = 1.0,
) -> ModeCoefficients:
    """Ball of radius ``radius`` hit by ``e^{ikz}`` (or ``e^{-kz}``)."""
    kind = IncidentKind(kind)
    if not (radius > 0 and k > 0):
        raise OracleError("radius and wave number must be positive")
    if k * radius >= MAX_SIZE_PARAMETER:
        raise OracleError(f"kR = {k * radius:g} must stay below {MAX_SIZE_PARAMETER:g}")
    if not kind.is_planewave:
        raise OracleError("the series oracle only handles plane waves")
    x = k * radius
    order = ORDER_STEP
    while True:
        orders = np.arange(order + 1)
        if kind is IncidentKind.PLANEWAVE_K:
            c = amplitude * (1j ** (orders % 4)) * (2 * orders + 1)
            radial = np.array([spherical_j(ell, x) for ell in orders])
            radial_d = scipy.special.spherical_jn(orders, x, derivative=True)
        else:
            c = amplitude * (-1.0) ** orders * (2 * orders + 1)
            radial = np.array([spherical_i(ell, x) for ell in orders])
            radial_d = scipy.special.spherical_in(orders, x, derivative=True)
        matrices = np.empty((len(orders), 2, 2), dtype=np.complex128)
        for ell in orders:
            matrices[ell] = [
                [spherical_h1(ell, x), spherical_k(ell, x)],
                [deriv("h1", ell, x), deriv("k", ell, x)],
            ]
        rhs = -np.stack([c * radial, c * radial_d], axis=-1)
        solution = _solve_modes(matrices, rhs)
        a, b = solution[:, 0], solution[:, 1]
        size = np.abs(a) + np.abs(b)
        largest = float(np.max(size))
        if largest == 0 or size[-1] <= TAIL_TOLERANCE * largest or order >= MAX_ORDER:
            break
        order = min(order + ORDER_STEP, MAX_ORDER)
    return ModeCoefficients(
        dim=3, k=float(k), radius=float(radius), orders=orders, a=a, b=b
    )


def sphere_eval(
    coeffs: ModeCoefficients, r: ArrayLike, theta: ArrayLike
) -> Tuple[NDArray, NDArray, NDArray, NDArray]:
    """``(u, Δu, ∂_r u, ∂_r Δu)`` at radius ``r`` and polar angle ``theta``."""
    if coeffs.dim != 3:
        raise OracleError("sphere_eval needs three-dimensional coefficients")
    return mode_series(coeffs, r, theta)


def sphere_farfield(coeffs: ModeCoefficients, theta: ArrayLike) -> FarFieldPair:
    """Far fields normalised against ``e^{ikr}/r`` and ``e^{-kr}/r``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    k = coeffs.k
    ell = coeffs.orders[:, None]
    legendre = _angular(coeffs, theta)
    radiating = -2 * k**2 * coeffs.a[:, None] * (-1j) ** ((ell + 1) % 4) / k
    evanescent = 2 * k**2 * coeffs.b[:, None] * math.pi / (2 * k)
    return FarFieldPair(
        angles=theta,
        directions=np.stack(
            [np.sin(theta), np.zeros_like(theta), np.cos(theta)], axis=-1
        ),
        ff_minus=np.sum(radiating * legendre, axis=0),
        ff_plus=np.sum(evanescent * legendre, axis=0),
    )


def sphere_traces(coeffs: ModeCoefficients, n_theta: int = 64) -> BoundaryTraces:
    """Cauchy data on the sphere, on a meridian of Gauss–Legendre nodes.

    The weights ``2π R² w_i`` account for the rotation about the axis."""
    nodes, gauss = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(nodes)
    radius = coeffs.radius
    u, lap_u, dr_u, dr_lap_u = sphere_eval(coeffs, np.full(n_theta, radius), theta)
    normals = np.stack([np.sin(theta), np.zeros_like(theta), np.cos(theta)], axis=-1)
    return BoundaryTraces(
        points=radius * normals,
        normals=normals,
        weights=2 * np.pi * radius**2 * gauss,
        u=u,
        lap_u=lap_u,
        dn_u=dr_u,
        dn_lap_u=dr_lap_u,
    )
