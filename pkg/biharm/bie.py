# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Nyström discretisation and solution of the boundary integral system.

The scattered field is sought as ``u_- = SL_k φ - DL_k ψ`` on the Helmholtz
branch and ``u_+ = SL_{ik} (φ + iη S_0² ψ) - DL_{ik} ψ`` on the modified
branch. The Dirichlet data ``u = f``, ``∂_ν u = g`` then give the system

.. code-block:: text

    [ S_ik - S_k      -K_ik + K_k + iη S_ik S_0²                  ] [φ]   [  2k² f ]
    [ -K'_ik + K'_k   T_ik - T_k - iη K'_ik S_0² + (iη/2) S_0²    ] [ψ] = [ -2k² g ]

Every kernel ``L(t, τ)`` is split as
``L1(t, τ) ln(4 sin²((t-τ)/2)) + L2(t, τ)`` with smooth ``L1`` and ``L2``;
the logarithmic part is integrated with the weights of
:py:func:`kress_weights`, the smooth part with the trapezoid rule.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from datetime import timedelta
import enum
import logging
import time
from typing import Callable, List, Optional, Tuple

import attrs
import humanize
import numpy as np
from numpy.typing import NDArray
import scipy.linalg

from .geometry import (
    BoundaryCurve,
    QuadratureGrid,
    contains,
    distance_to_curve,
    grid,
)
from .incident import IncidentField, eval_incident
from .kernels import Branch, WaveNumber, dphi_radial, hess_radial, phi_radial
from .specfun import bessel_i, bessel_j

logger = logging.getLogger(__name__)

EULER_GAMMA = float(np.euler_gamma)
RESIDUAL_TOLERANCE = 1e-10


def _secho(msg, **kwargs):
    """Log at info level, passing kwargs as styles for click.secho()"""
    logger.info(msg, extra={"style": kwargs})


def format_duration(seconds: float) -> str:
    return humanize.precisedelta(
        timedelta(seconds=seconds), minimum_unit="milliseconds"
    )


class OperatorError(ValueError):
    pass


class SingularSystemError(ArithmeticError):
    def __init__(self, condition: float):
        self.condition = condition

    def __str__(self) -> str:
        return (
            "the boundary system is numerically singular "
            f"(condition estimate {self.condition:.3e})"
        )


class SolverAccuracyError(ArithmeticError):
    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance

    def __str__(self) -> str:
        return (
            f"relative residual {self.residual:.3e} exceeds "
            f"the tolerance {self.tolerance:.1e}"
        )


class Operator(enum.Enum):
    SINGLE_LAYER = "S"
    DOUBLE_LAYER = "K"
    ADJOINT_DOUBLE_LAYER = "K'"
    HYPERSINGULAR_DIFFERENCE = "T"


def _positive(instance, attribute, value):
    if not value > 0:
        raise ValueError(f"{attribute.name} must be positive, got {value!r}")


def _nonzero(instance, attribute, value):
    if value == 0:
        raise ValueError(
            f"{attribute.name} must be non-zero: with η = 0 the system is not "
            "injective at the modified-branch eigenvalues"
        )


@attrs.frozen
class SolverConfig:
    k: float = attrs.field(converter=float, validator=_positive)
    eta: float = attrs.field(default=1.0, converter=float, validator=_nonzero)
    n: int = attrs.field(
        default=64,
        validator=[attrs.validators.instance_of(int), attrs.validators.ge(8)],
    )
    workers: int = attrs.field(
        default=1,
        validator=[attrs.validators.instance_of(int), attrs.validators.ge(1)],
    )
    residual_tolerance: float = attrs.field(default=RESIDUAL_TOLERANCE, converter=float)

    def to_dict(self):
        return {"k": self.k, "eta": self.eta, "n": self.n}


@attrs.frozen
class DirichletData:
    """Boundary values ``f = u`` and ``g = ∂_ν u`` the scattered field must take."""

    f: NDArray[np.complex128]
    g: NDArray[np.complex128]

    def rhs(self, k: float) -> NDArray[np.complex128]:
        return np.concatenate([2 * k**2 * self.f, -2 * k**2 * self.g])


@attrs.define(eq=False)
class SystemMatrix:
    """The assembled ``4n × 4n`` system, with ``S_0`` kept for the fields."""

    matrix: NDArray[np.complex128]
    grid: QuadratureGrid
    config: SolverConfig
    single_layer_laplace: NDArray[np.float64]
    _lu: Optional[Tuple[NDArray, NDArray]] = attrs.field(default=None, repr=False)
    _condition: Optional[float] = attrs.field(default=None, repr=False)

    @property
    def curve(self) -> BoundaryCurve:
        return self.grid.curve

    def factorize(self) -> Tuple[Tuple[NDArray, NDArray], float]:
        """LU factors and 1-norm condition estimate, computed once."""
        if self._lu is None:
            lu, piv = scipy.linalg.lu_factor(self.matrix, check_finite=True)
            (gecon,) = scipy.linalg.lapack.get_lapack_funcs(("gecon",), (lu,))
            anorm = np.linalg.norm(self.matrix, 1)
            rcond, info = gecon(lu, anorm, norm="1")
            self._lu = (lu, piv)
            self._condition = float(np.inf) if rcond == 0 else float(1 / rcond)
        assert self._condition is not None
        return self._lu, self._condition


@attrs.frozen(eq=False)
class DensityPair:
    """Solution densities on the grid nodes together with solve diagnostics.

    ``phi_plus`` is the density ``φ + iη S_0² ψ`` of the modified single layer.
    """

    grid: QuadratureGrid
    k: float
    eta: float
    phi: NDArray[np.complex128]
    psi: NDArray[np.complex128]
    phi_plus: NDArray[np.complex128]
    residual: float = 0.0
    condition: float = 1.0


def kress_weights(n: int) -> NDArray[np.float64]:
    """Weights ``R_j`` integrating ``ln(4 sin²((t-τ)/2)) f(τ)`` at ``t = t_0``.

    ``R_j = -(2π/n) Σ_{m=1}^{n-1} cos(m t_j)/m - (π/n²) cos(n t_j)``."""
    m = np.arange(1, n)
    j = np.arange(2 * n)
    t = np.pi * j / n
    return -(2 * np.pi / n) * (np.cos(np.outer(t, m)) @ (1.0 / m)) - (
        np.pi / n**2
    ) * np.cos(n * t)


def _log_matrix(n: int) -> NDArray[np.float64]:
    # circulant(c)[i, j] == c[(i - j) mod 2n]
    return scipy.linalg.circulant(kress_weights(n))


@attrs.frozen
class _Pairs:
    rows: NDArray[np.int64]
    d: NDArray[np.float64]
    r: NDArray[np.float64]
    diagonal: NDArray[np.bool_]
    log_sin: NDArray[np.float64]


def _pairs(grid: QuadratureGrid, rows: NDArray[np.int64]) -> _Pairs:
    d = grid.points[rows, None, :] - grid.points[None, :, :]
    r = np.hypot(d[..., 0], d[..., 1])
    diagonal = rows[:, None] == np.arange(grid.size)[None, :]
    r = np.where(diagonal, 1.0, r)
    half = 0.5 * (grid.nodes[rows, None] - grid.nodes[None, :])
    sin2 = np.where(diagonal, 0.25, np.sin(half) ** 2)
    return _Pairs(rows, d, r, diagonal, np.log(4 * sin2))


def _single_layer_parts(b: WaveNumber, grid: QuadratureGrid, p: _Pairs):
    jac_y = grid.jacobians[None, :]
    jac_x = grid.jacobians[p.rows]
    kernel = phi_radial(b, p.r) * jac_y
    if b.branch is Branch.LAPLACE:
        log_part = np.broadcast_to(-jac_y / (4 * np.pi), p.r.shape) + 0j
        diagonal = -np.log(jac_x) / (2 * np.pi) * jac_x + 0j
        return kernel, log_part, -jac_x / (4 * np.pi) + 0j, diagonal
    k = b.k
    constant = np.log(k * jac_x / 2) + EULER_GAMMA
    if b.branch is Branch.HELMHOLTZ:
        log_part = -bessel_j(0, k * p.r) / (4 * np.pi) * jac_y + 0j
        diagonal = (0.25j - constant / (2 * np.pi)) * jac_x
    else:
        log_part = -bessel_i(0, k * p.r) / (4 * np.pi) * jac_y + 0j
        diagonal = -constant / (2 * np.pi) * jac_x + 0j
    return kernel, log_part, -jac_x / (4 * np.pi) + 0j, diagonal


def _double_layer_parts(
    b: WaveNumber, grid: QuadratureGrid, p: _Pairs, adjoint: bool
):
    if b.branch is Branch.LAPLACE:
        raise OperatorError("double-layer operators are not used on the Laplace branch")
    k = b.k
    jac_y = grid.jacobians[None, :]
    jac_x = grid.jacobians[p.rows]
    if adjoint:
        # ∂Φ(x, y)/∂ν(x)
        projection = np.sum(p.d * grid.normals[p.rows, None, :], axis=-1)
        sign = 1.0
    else:
        # ∂Φ(x, y)/∂ν(y)
        projection = np.sum(p.d * grid.normals[None, :, :], axis=-1)
        sign = -1.0
    kernel = sign * dphi_radial(b, p.r) * projection / p.r * jac_y
    if b.branch is Branch.HELMHOLTZ:
        log_part = sign * k / (4 * np.pi) * bessel_j(1, k * p.r)
    else:
        log_part = -sign * k / (4 * np.pi) * bessel_i(1, k * p.r)
    log_part = log_part * projection / p.r * jac_y + 0j
    diagonal = -grid.curvature[p.rows] * jac_x / (4 * np.pi) + 0j
    return kernel, log_part, np.zeros(len(p.rows), complex), diagonal


def _hypersingular_difference_parts(k: float, grid: QuadratureGrid, p: _Pairs):
    jac_y = grid.jacobians[None, :]
    jac_x = grid.jacobians[p.rows]
    n_x = grid.normals[p.rows, None, :]
    n_y = grid.normals[None, :, :]
    dnx = np.sum(p.d * n_x, axis=-1)
    dny = np.sum(p.d * n_y, axis=-1)
    nxny = np.sum(n_x * n_y, axis=-1)
    helmholtz, modified = WaveNumber.helmholtz(k), WaveNumber.modified(k)

    def hypersingular(b):
        return -nxny * dphi_radial(b, p.r) / p.r - dnx * dny / p.r**2 * hess_radial(
            b, p.r
        )

    kernel = (hypersingular(modified) - hypersingular(helmholtz)) * jac_y
    kr = k * p.r
    log_part = (
        k / (4 * np.pi) * (bessel_i(1, kr) + bessel_j(1, kr)) * nxny / p.r
        + k**2
        / (4 * np.pi)
        * (bessel_i(2, kr) - bessel_j(2, kr))
        * dnx
        * dny
        / p.r**2
    ) * jac_y + 0j
    constant = np.log(k * jac_x / 2) + EULER_GAMMA
    diagonal = (
        k**2 / (2 * np.pi) * constant - k**2 / (4 * np.pi) - 0.125j * k**2
    ) * jac_x
    return kernel, log_part, k**2 / (4 * np.pi) * jac_x + 0j, diagonal


def _operator_rows(
    op: Operator, b: WaveNumber, grid: QuadratureGrid, rows: NDArray[np.int64]
) -> NDArray[np.complex128]:
    p = _pairs(grid, rows)
    if op is Operator.SINGLE_LAYER:
        parts = _single_layer_parts(b, grid, p)
    elif op is Operator.HYPERSINGULAR_DIFFERENCE:
        if b.branch is Branch.LAPLACE:
            raise OperatorError("the hypersingular difference needs a wave number")
        parts = _hypersingular_difference_parts(b.k, grid, p)
    else:
        parts = _double_layer_parts(
            b, grid, p, adjoint=op is Operator.ADJOINT_DOUBLE_LAYER
        )
    kernel, log_part, log_diagonal, diagonal = parts
    log_part = np.array(log_part, dtype=np.complex128)
    diag_rows, diag_cols = np.nonzero(p.diagonal)
    log_part[diag_rows, diag_cols] = log_diagonal[diag_rows]
    smooth = kernel - log_part * p.log_sin
    smooth[diag_rows, diag_cols] = diagonal[diag_rows]
    return _log_matrix(grid.n)[rows] * log_part + grid.weight * smooth


def _row_blocks(size: int, workers: int) -> List[NDArray[np.int64]]:
    return [block for block in np.array_split(np.arange(size), workers) if len(block)]


def _by_rows(
    compute: Callable[[NDArray[np.int64]], NDArray], size: int, workers: int
) -> NDArray:
    blocks = _row_blocks(size, workers)
    if workers == 1 or len(blocks) == 1:
        return compute(np.arange(size))
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return np.vstack(list(executor.map(compute, blocks)))


def discretize_op(
    op: Operator | str, b: WaveNumber, grid: QuadratureGrid, workers: int = 1
) -> NDArray[np.complex128]:
    """The ``2n × 2n`` Nyström matrix of ``op`` on branch ``b``.

    ``op`` is one of ``S``, ``K``, ``K'`` or ``T``; ``T`` stands for the
    difference ``T_{ik} - T_k`` at the wave number of ``b``. The double-layer
    operators and ``T`` are rejected on the Laplace branch."""
    op = Operator(op)
    if op is not Operator.SINGLE_LAYER and b.branch is Branch.LAPLACE:
        raise OperatorError(f"operator {op.value} is not defined on the Laplace branch")
    return _by_rows(lambda rows: _operator_rows(op, b, grid, rows), grid.size, workers)


def spectral_derivative(size: int) -> NDArray[np.float64]:
    """Differentiation matrix of the trigonometric interpolant on ``size``
    equispaced nodes of ``[0, 2π)``."""
    h = 2 * np.pi / size
    j = np.arange(1, size)
    column = np.concatenate([[0.0], 0.5 * (-1.0) ** j / np.tan(j * h / 2)])
    return scipy.linalg.circulant(column)


def hypersingular(b: WaveNumber, grid: QuadratureGrid) -> NDArray[np.complex128]:
    """``T_b`` through ``T_b = d/ds S_b d/ds ± k² ν·S_b(ν ·)``.

    The sign is ``+`` on the Helmholtz branch and ``-`` on the modified one."""
    if b.branch is Branch.LAPLACE:
        raise OperatorError("T is not defined on the Laplace branch")
    single = discretize_op(Operator.SINGLE_LAYER, b, grid)
    jac = grid.jacobians
    derivative = spectral_derivative(grid.size)
    sign = 1.0 if b.branch is Branch.HELMHOLTZ else -1.0
    normals = grid.normals @ grid.normals.T
    tangential = (derivative @ (single / jac[None, :]) @ derivative) / jac[:, None]
    return tangential + sign * b.k**2 * single * normals


def assemble(
    curve: BoundaryCurve, config: SolverConfig, progressbar=None
) -> SystemMatrix:
    from .progressbar import no_progressbar

    progressbar = progressbar or no_progressbar
    g = grid(curve, config.n)
    k, eta = config.k, config.eta
    helmholtz, modified = WaveNumber.helmholtz(k), WaveNumber.modified(k)
    steps = [
        ("S0", Operator.SINGLE_LAYER, WaveNumber.laplace()),
        ("Sk", Operator.SINGLE_LAYER, helmholtz),
        ("Sik", Operator.SINGLE_LAYER, modified),
        ("Kk", Operator.DOUBLE_LAYER, helmholtz),
        ("Kik", Operator.DOUBLE_LAYER, modified),
        ("Kpk", Operator.ADJOINT_DOUBLE_LAYER, helmholtz),
        ("Kpik", Operator.ADJOINT_DOUBLE_LAYER, modified),
        ("T", Operator.HYPERSINGULAR_DIFFERENCE, helmholtz),
    ]
    ops = {}
    started = time.monotonic()
    with progressbar(steps, label="Assembling boundary operators") as bar:
        for name, op, b in bar:
            ops[name] = discretize_op(op, b, g, workers=config.workers)
    s0 = ops["S0"].real
    s0_squared = s0 @ s0
    matrix = np.block(
        [
            [
                ops["Sik"] - ops["Sk"],
                -ops["Kik"] + ops["Kk"] + 1j * eta * ops["Sik"] @ s0_squared,
            ],
            [
                -ops["Kpik"] + ops["Kpk"],
                ops["T"]
                - 1j * eta * ops["Kpik"] @ s0_squared
                + 0.5j * eta * s0_squared,
            ],
        ]
    )
    logger.debug(
        "Assembled %d×%d system in %s",
        *matrix.shape,
        format_duration(time.monotonic() - started),
    )
    return SystemMatrix(matrix=matrix, grid=g, config=config, single_layer_laplace=s0)


def dirichlet_data(incident: IncidentField, g: QuadratureGrid) -> DirichletData:
    """``f = -u^i`` and ``g = -∂_ν u^i`` on the grid nodes."""
    if not incident.kind.is_planewave:
        source = np.asarray(incident.source)[None, :]
        if contains(g.curve, source)[0] or distance_to_curve(g.curve, source)[0] < 1e-8:
            raise OperatorError(
                f"point source {incident.source} must lie outside the obstacle"
            )
    values = eval_incident(incident, g.points)
    normal_derivative = np.sum(values.gradient * g.normals, axis=-1)
    return DirichletData(f=-values.value, g=-normal_derivative)


def rhs_from_incident(
    incident: IncidentField, g: QuadratureGrid, k: float
) -> NDArray[np.complex128]:
    if not np.isclose(incident.k, k):
        raise OperatorError(
            f"incident wave number {incident.k} differs from the solver's {k}"
        )
    return dirichlet_data(incident, g).rhs(k)


def solve(mat: SystemMatrix, rhs: NDArray[np.complex128]) -> DensityPair:
    """Solves the system by LU and checks the relative residual."""
    rhs = np.asarray(rhs, dtype=np.complex128)
    size = mat.grid.size
    if rhs.shape != (2 * size,):
        raise OperatorError(f"right-hand side must have length {2 * size}")
    started = time.monotonic()
    (lu, piv), condition = mat.factorize()
    if not np.isfinite(condition) or condition * np.finfo(float).eps >= 1:
        raise SingularSystemError(condition)
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0:
        solution = np.zeros_like(rhs)
        residual = 0.0
    else:
        solution = scipy.linalg.lu_solve((lu, piv), rhs)
        residual = float(np.linalg.norm(mat.matrix @ solution - rhs) / rhs_norm)
    tolerance = mat.config.residual_tolerance
    if residual >= tolerance:
        raise SolverAccuracyError(residual, tolerance)
    phi, psi = solution[:size], solution[size:]
    s0 = mat.single_layer_laplace
    phi_plus = phi + 1j * mat.config.eta * (s0 @ (s0 @ psi))
    _secho(
        f"Solved {2 * size}×{2 * size} system in "
        f"{format_duration(time.monotonic() - started)}: "
        f"residual {residual:.2e}, condition {condition:.2e}",
        fg="green",
    )
    return DensityPair(
        grid=mat.grid,
        k=mat.config.k,
        eta=mat.config.eta,
        phi=phi,
        psi=psi,
        phi_plus=phi_plus,
        residual=residual,
        condition=condition,
    )


def singular_values(mat: SystemMatrix) -> NDArray[np.float64]:
    """Singular values in decreasing order."""
    return scipy.linalg.svdvals(mat.matrix)
