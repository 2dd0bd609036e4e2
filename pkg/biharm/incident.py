# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Incident fields: plane waves and point sources on both branches.

Every incident field solves either ``Δu + k²u = 0`` (``*-k`` kinds) or
``Δu - k²u = 0`` (``*-ik`` kinds), so its Laplacian is ``∓k²`` times its
value.
"""

from __future__ import annotations

import enum
from typing import Any, Dict, NamedTuple, Optional, Tuple

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray

from .kernels import Branch, WaveNumber, dphi_radial, pairwise, phi_radial


class IncidentFieldError(ValueError):
    pass


class IncidentKind(enum.Enum):
    PLANEWAVE_K = "planewave-k"
    PLANEWAVE_IK = "planewave-ik"
    POINTSOURCE_K = "pointsource-k"
    POINTSOURCE_IK = "pointsource-ik"

    @property
    def branch(self) -> Branch:
        if self in (IncidentKind.PLANEWAVE_K, IncidentKind.POINTSOURCE_K):
            return Branch.HELMHOLTZ
        return Branch.MODIFIED

    @property
    def is_planewave(self) -> bool:
        return self in (IncidentKind.PLANEWAVE_K, IncidentKind.PLANEWAVE_IK)


def _unit_vector(value) -> Optional[Tuple[float, ...]]:
    if value is None:
        return None
    if np.isscalar(value):
        return (float(np.cos(value)), float(np.sin(value)))
    vector = np.asarray(value, dtype=np.float64)
    norm = float(np.linalg.norm(vector))
    if norm == 0:
        raise IncidentFieldError("direction must be a non-zero vector")
    return tuple(float(c) for c in vector / norm)


def _point(value) -> Optional[Tuple[float, ...]]:
    if value is None:
        return None
    return tuple(float(c) for c in value)


class IncidentValues(NamedTuple):
    value: NDArray[np.complex128]
    gradient: NDArray[np.complex128]
    laplacian: NDArray[np.complex128]


@attrs.frozen
class IncidentField:
    """An incident field.

    Plane waves carry a unit ``direction`` (an angle is accepted and turned
    into a vector); point sources carry a ``source`` location, which must lie
    outside the obstacle."""

    kind: IncidentKind = attrs.field(converter=IncidentKind)
    k: float = attrs.field(converter=float)
    direction: Optional[Tuple[float, ...]] = attrs.field(
        default=None, converter=_unit_vector
    )
    source: Optional[Tuple[float, ...]] = attrs.field(default=None, converter=_point)
    amplitude: complex = attrs.field(default=1.0, converter=complex)

    @k.validator
    def _check_k(self, attribute, value):
        if not value > 0:
            raise IncidentFieldError(f"wave number must be positive, got {value!r}")

    def __attrs_post_init__(self):
        if self.kind.is_planewave and self.direction is None:
            raise IncidentFieldError(f"{self.kind.value} needs a direction")
        if not self.kind.is_planewave and self.source is None:
            raise IncidentFieldError(f"{self.kind.value} needs a source point")

    @property
    def wave_number(self) -> WaveNumber:
        return WaveNumber(k=self.k, branch=self.kind.branch)

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {"kind": self.kind.value, "k": self.k}
        if self.direction is not None:
            result["direction"] = list(self.direction)
        if self.source is not None:
            result["source"] = list(self.source)
        if self.amplitude != 1:
            result["amplitude"] = [self.amplitude.real, self.amplitude.imag]
        return result


def eval_incident(incident: IncidentField, x: ArrayLike) -> IncidentValues:
    """Value, gradient and Laplacian of ``incident`` at the points ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    k = incident.k
    sign = -1.0 if incident.kind.branch is Branch.HELMHOLTZ else 1.0
    if incident.kind.is_planewave:
        direction = np.asarray(incident.direction)
        if incident.kind is IncidentKind.PLANEWAVE_K:
            rate = 1j * k
        else:
            rate = -k + 0j
        value = incident.amplitude * np.exp(rate * (x @ direction))
        gradient = rate * value[:, None] * direction[None, :]
    else:
        d, r = pairwise(x, np.asarray(incident.source)[None, :])
        if np.any(r < 1e-14):
            raise IncidentFieldError("point source evaluated at its own location")
        b = incident.wave_number
        value = incident.amplitude * phi_radial(b, r, x.shape[-1])
        gradient = (incident.amplitude * dphi_radial(b, r, x.shape[-1]) / r)[
            :, None
        ] * d
    return IncidentValues(value, gradient, sign * k**2 * value)
