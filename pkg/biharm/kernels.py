# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Fundamental solutions and far-field kernels.

Three branches share one interface: the Helmholtz branch ``Φ_k``, the
modified Helmholtz branch ``Φ_{ik}`` (wave number ``ik``) and the Laplace
kernel ``Φ_0`` used by the regularising operator ``S_0``. The biharmonic
wave fundamental solution is ``G_k = (Φ_k - Φ_{ik}) / (2k²)``.
"""

from __future__ import annotations

import enum
import math
from typing import Tuple

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray
from typing_extensions import Self

from .specfun import hankel1, macdonald_k

# Points closer than this are treated as coincident.
COINCIDENCE_TOLERANCE = 1e-14
# Largest exponent accepted by the modified far-field kernel.
FARFIELD_EXPONENT_LIMIT = 600.0


class CoincidentPointsError(ValueError):
    pass


class FarFieldOverflowError(OverflowError):
    pass


class Branch(enum.Enum):
    HELMHOLTZ = "k"
    MODIFIED = "ik"
    LAPLACE = "0"


@attrs.frozen
class WaveNumber:
    """A wave number ``k > 0`` tagged with the branch it is used on."""

    k: float = attrs.field(converter=float)
    branch: Branch = attrs.field(validator=attrs.validators.instance_of(Branch))

    @k.validator
    def _check_k(self, attribute, value):
        if self.branch is not Branch.LAPLACE and not value > 0:
            raise ValueError(f"wave number must be positive, got {value!r}")

    @classmethod
    def helmholtz(cls, k: float) -> Self:
        return cls(k=k, branch=Branch.HELMHOLTZ)

    @classmethod
    def modified(cls, k: float) -> Self:
        return cls(k=k, branch=Branch.MODIFIED)

    @classmethod
    def laplace(cls) -> Self:
        return cls(k=0.0, branch=Branch.LAPLACE)


def pairwise(x: ArrayLike, y: ArrayLike) -> Tuple[NDArray, NDArray]:
    """Differences ``x - y`` and distances, broadcasting leading axes."""
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return d, np.linalg.norm(d, axis=-1)


def _distance(x: ArrayLike, y: ArrayLike) -> Tuple[NDArray, NDArray]:
    d, r = pairwise(x, y)
    if np.any(r < COINCIDENCE_TOLERANCE):
        raise CoincidentPointsError("kernel evaluated at coincident points")
    return d, r


def phi_radial(b: WaveNumber, r: ArrayLike, dim: int = 2) -> NDArray:
    """``Φ_b`` as a function of the distance ``r > 0``."""
    r = np.asarray(r, dtype=np.float64)
    k = b.k
    if dim == 2:
        if b.branch is Branch.HELMHOLTZ:
            return 0.25j * hankel1(0, k * r)
        if b.branch is Branch.MODIFIED:
            return macdonald_k(0, k * r) / (2 * np.pi) + 0j
        return -np.log(r) / (2 * np.pi) + 0j
    if b.branch is Branch.HELMHOLTZ:
        return np.exp(1j * k * r) / (4 * np.pi * r)
    if b.branch is Branch.MODIFIED:
        return np.exp(-k * r) / (4 * np.pi * r) + 0j
    return 1 / (4 * np.pi * r) + 0j


def dphi_radial(b: WaveNumber, r: ArrayLike, dim: int = 2) -> NDArray:
    """Radial derivative ``Φ_b'(r)``."""
    r = np.asarray(r, dtype=np.float64)
    k = b.k
    if dim == 2:
        if b.branch is Branch.HELMHOLTZ:
            return -0.25j * k * hankel1(1, k * r)
        if b.branch is Branch.MODIFIED:
            return -k * macdonald_k(1, k * r) / (2 * np.pi) + 0j
        return -1 / (2 * np.pi * r) + 0j
    if b.branch is Branch.HELMHOLTZ:
        return np.exp(1j * k * r) * (1j * k * r - 1) / (4 * np.pi * r**2)
    if b.branch is Branch.MODIFIED:
        return -np.exp(-k * r) * (k * r + 1) / (4 * np.pi * r**2) + 0j
    return -1 / (4 * np.pi * r**2) + 0j


def hess_radial(b: WaveNumber, r: ArrayLike, dim: int = 2) -> NDArray:
    """``Φ_b''(r) - Φ_b'(r)/r``, the anisotropic part of the Hessian."""
    r = np.asarray(r, dtype=np.float64)
    k = b.k
    if dim == 2:
        if b.branch is Branch.HELMHOLTZ:
            return 0.25j * k**2 * hankel1(2, k * r)
        if b.branch is Branch.MODIFIED:
            return k**2 * macdonald_k(2, k * r) / (2 * np.pi) + 0j
        return 1 / (np.pi * r**2) + 0j
    if b.branch is Branch.HELMHOLTZ:
        return (
            np.exp(1j * k * r)
            * (-(k**2) / r - 3j * k / r**2 + 3 / r**3)
            / (4 * np.pi)
        )
    if b.branch is Branch.MODIFIED:
        return np.exp(-k * r) * (k**2 / r + 3 * k / r**2 + 3 / r**3) / (4 * np.pi) + 0j
    return 3 / (4 * np.pi * r**3) + 0j


def phi(b: WaveNumber, x: ArrayLike, y: ArrayLike) -> NDArray:
    """``Φ_b(x, y)``; the dimension is read from the last axis."""
    d, r = _distance(x, y)
    return phi_radial(b, r, d.shape[-1])


def grad_phi_y(b: WaveNumber, x: ArrayLike, y: ArrayLike) -> NDArray:
    """Gradient of ``Φ_b(x, y)`` with respect to ``y``."""
    d, r = _distance(x, y)
    return -(dphi_radial(b, r, d.shape[-1]) / r)[..., None] * d


def dphi_dn(b: WaveNumber, x: ArrayLike, y: ArrayLike, n_y: ArrayLike) -> NDArray:
    """``∂Φ_b(x, y)/∂ν(y)``, the double-layer kernel."""
    return np.sum(grad_phi_y(b, x, y) * np.asarray(n_y), axis=-1)


def d2phi_dnxdny(
    b: WaveNumber, x: ArrayLike, y: ArrayLike, n_x: ArrayLike, n_y: ArrayLike
) -> NDArray:
    """``∂²Φ_b(x, y)/∂ν(x)∂ν(y)``, the hypersingular kernel off the diagonal."""
    d, r = _distance(x, y)
    dim = d.shape[-1]
    n_x, n_y = np.asarray(n_x), np.asarray(n_y)
    dnx = np.sum(d * n_x, axis=-1)
    dny = np.sum(d * n_y, axis=-1)
    nxny = np.sum(n_x * n_y, axis=-1)
    return -nxny * dphi_radial(b, r, dim) / r - dnx * dny / r**2 * hess_radial(
        b, r, dim
    )


def _biharm_check(k: float, dim: int) -> None:
    if not k > 0:
        raise ValueError(f"wave number must be positive, got {k!r}")
    if dim not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {dim!r}")


def biharm_g(k: float, r: ArrayLike, dim: int = 2) -> NDArray:
    """``G_k(r)``, finite at ``r = 0``."""
    _biharm_check(k, dim)
    r = np.asarray(r, dtype=np.float64)
    at_origin = r == 0
    rs = np.where(at_origin, 1.0, r)
    if dim == 2:
        value = 1j / (8 * k**2) * (
            hankel1(0, k * rs) + 2j / np.pi * macdonald_k(0, k * rs)
        )
        return np.where(at_origin, 1j / (8 * k**2), value)
    value = (np.expm1(1j * k * rs) - np.expm1(-k * rs)) / (8 * np.pi * k**2 * rs)
    return np.where(at_origin, (1 + 1j) / (8 * np.pi * k), value)


def biharm_lap_g(k: float, r: ArrayLike, dim: int = 2) -> NDArray:
    """``ΔG_k(r) = -(Φ_k + Φ_{ik}) / 2``, for ``r > 0``."""
    _biharm_check(k, dim)
    r = np.asarray(r, dtype=np.float64)
    if dim == 2:
        return -0.125j * hankel1(0, k * r) - macdonald_k(0, k * r) / (4 * np.pi)
    return -(np.exp(1j * k * r) + np.exp(-k * r)) / (8 * np.pi * r)


def _dg_radial(k: float, r: NDArray, dim: int) -> NDArray:
    if dim == 2:
        return -1j / (8 * k) * (
            hankel1(1, k * r) + 2j / np.pi * macdonald_k(1, k * r)
        )
    return (
        (1j * k * r - 1) * np.exp(1j * k * r) + (k * r + 1) * np.exp(-k * r)
    ) / (8 * np.pi * k**2 * r**2)


def _dlapg_radial(k: float, r: NDArray, dim: int) -> NDArray:
    if dim == 2:
        return 0.125j * k * hankel1(1, k * r) + k * macdonald_k(1, k * r) / (4 * np.pi)
    return (
        (1 - 1j * k * r) * np.exp(1j * k * r) + (1 + k * r) * np.exp(-k * r)
    ) / (8 * np.pi * r**2)


def biharm_grad_g(k: float, x: ArrayLike, y: ArrayLike) -> NDArray:
    """Gradient of ``G_k(|x - y|)`` with respect to ``x``."""
    d, r = _distance(x, y)
    _biharm_check(k, d.shape[-1])
    return (_dg_radial(k, r, d.shape[-1]) / r)[..., None] * d


def biharm_grad_lap_g(k: float, x: ArrayLike, y: ArrayLike) -> NDArray:
    """Gradient of ``ΔG_k(|x - y|)`` with respect to ``x``."""
    d, r = _distance(x, y)
    _biharm_check(k, d.shape[-1])
    return (_dlapg_radial(k, r, d.shape[-1]) / r)[..., None] * d


def farfield_constants(k: float, dim: int = 2) -> Tuple[complex, complex]:
    """The constants ``(c_-, c_+)`` of the Helmholtz and modified far fields."""
    _biharm_check(k, dim)
    base = k ** ((dim - 3) / 2) / (2 * (2 * math.pi) ** ((dim - 1) / 2))
    c_minus = 1j * np.exp(-1j * (dim - 1) * math.pi / 4) * base
    return complex(c_minus), complex(base)


def _farfield_geometry(xhat: ArrayLike, y: ArrayLike, n_y: ArrayLike):
    xhat = np.atleast_2d(np.asarray(xhat, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    n_y = np.atleast_2d(np.asarray(n_y, dtype=np.float64))
    return xhat, xhat @ y.T, xhat @ n_y.T


def ff_kernel_minus(
    k: float, xhat: ArrayLike, y: ArrayLike, n_y: ArrayLike
) -> Tuple[NDArray, NDArray]:
    """Helmholtz far-field kernels ``(c_- ∂_ν e^{-ik x̂·y}, c_- e^{-ik x̂·y})``.

    Rows follow the directions ``xhat``, columns the source points ``y``."""
    xhat, xy, xn = _farfield_geometry(xhat, y, n_y)
    c_minus, _ = farfield_constants(k, xhat.shape[-1])
    wave = c_minus * np.exp(-1j * k * xy)
    return -1j * k * xn * wave, wave


def ff_kernel_plus(
    k: float, xhat: ArrayLike, y: ArrayLike, n_y: ArrayLike
) -> Tuple[NDArray, NDArray]:
    """Modified far-field kernels ``(c_+ ∂_ν e^{k x̂·y}, c_+ e^{k x̂·y})``."""
    xhat, xy, xn = _farfield_geometry(xhat, y, n_y)
    if xy.size and k * float(np.max(xy)) > FARFIELD_EXPONENT_LIMIT:
        raise FarFieldOverflowError(
            f"e^(k x̂·y) overflows: k x̂·y reaches {k * float(np.max(xy)):.1f}"
        )
    _, c_plus = farfield_constants(k, xhat.shape[-1])
    wave = c_plus * np.exp(k * xy) + 0j
    return k * xn * wave, wave
