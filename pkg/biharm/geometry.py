# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Smooth closed curves bounding the obstacle and their periodic grids."""

from __future__ import annotations

import logging
import math
from typing import Any, Callable, Dict, NamedTuple, Sequence

import attrs
import numpy as np
from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

# Sampling used by the regularity screens, the winding number and distances.
SCREEN_SAMPLES = 1024
DISTANCE_SAMPLES = 4096
MIN_GRID_HALF_SIZE = 8

KITE_BULGE = 0.65
KITE_HEIGHT = 1.5

ParametricMap = Callable[[NDArray[np.float64]], NDArray[np.float64]]


class GeometryError(ValueError):
    pass


class Frame(NamedTuple):
    point: NDArray[np.float64]
    tangent: NDArray[np.float64]
    normal: NDArray[np.float64]
    jacobian: NDArray[np.float64]
    curvature: NDArray[np.float64]


@attrs.frozen(eq=False)
class BoundaryCurve:
    """A counter-clockwise parametrisation of the boundary over ``[0, 2π)``.

    The three maps take an array of parameters of shape ``(N,)`` and return
    an array of shape ``(N, 2)``."""

    kind: str
    params: Dict[str, Any]
    position: ParametricMap
    velocity: ParametricMap
    acceleration: ParametricMap

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, **self.params}


def _columns(a: NDArray, b: NDArray) -> NDArray[np.float64]:
    return np.stack([a, b], axis=-1)


def _segments_cross(points: NDArray[np.float64]) -> bool:
    """Whether two non-adjacent edges of the closed polygon intersect."""
    p = points
    q = np.roll(points, -1, axis=0)
    count = len(p)

    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (
            b[..., 1] - a[..., 1]
        ) * (c[..., 0] - a[..., 0])

    i = np.arange(count)
    pi, qi = p[:, None, :], q[:, None, :]
    pj, qj = p[None, :, :], q[None, :, :]
    d1 = orient(pi, qi, pj)
    d2 = orient(pi, qi, qj)
    d3 = orient(pj, qj, pi)
    d4 = orient(pj, qj, qi)
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    gap = np.abs(i[:, None] - i[None, :])
    adjacent = (gap <= 1) | (gap == count - 1)
    return bool(np.any(crossing & ~adjacent))


def _validated(curve: BoundaryCurve) -> BoundaryCurve:
    t = np.linspace(0.0, 2 * np.pi, SCREEN_SAMPLES, endpoint=False)
    points = curve.position(t)
    speed = np.linalg.norm(curve.velocity(t), axis=-1)
    scale = float(np.max(np.linalg.norm(points - points.mean(axis=0), axis=-1)))
    if not np.all(np.isfinite(points)) or scale <= 0:
        raise GeometryError(f"degenerate {curve.kind} curve {curve.params}")
    if float(np.min(speed)) <= 1e-8 * scale:
        raise GeometryError(
            f"{curve.kind} curve {curve.params} is not regular: "
            f"|x'| reaches {float(np.min(speed)):.3e}"
        )
    if _segments_cross(points):
        raise GeometryError(f"{curve.kind} curve {curve.params} self-intersects")
    # signed area, positive for counter-clockwise orientation
    x, y = points[:, 0], points[:, 1]
    area = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    if area <= 0:
        raise GeometryError(
            f"{curve.kind} curve {curve.params} is not counter-clockwise"
        )
    return curve


def make_circle(radius: float, center: Sequence[float] = (0.0, 0.0)) -> BoundaryCurve:
    if not radius > 0:
        raise GeometryError(f"circle radius must be positive, got {radius!r}")
    c = np.asarray(center, dtype=np.float64)
    return _validated(
        BoundaryCurve(
            kind="circle",
            params={"radius": float(radius)},
            position=lambda t: c + radius * _columns(np.cos(t), np.sin(t)),
            velocity=lambda t: radius * _columns(-np.sin(t), np.cos(t)),
            acceleration=lambda t: -radius * _columns(np.cos(t), np.sin(t)),
        )
    )


def make_ellipse(a: float, b: float) -> BoundaryCurve:
    if not (a > 0 and b > 0):
        raise GeometryError(f"ellipse semi-axes must be positive, got {a!r}, {b!r}")
    return _validated(
        BoundaryCurve(
            kind="ellipse",
            params={"a": float(a), "b": float(b)},
            position=lambda t: _columns(a * np.cos(t), b * np.sin(t)),
            velocity=lambda t: _columns(-a * np.sin(t), b * np.cos(t)),
            acceleration=lambda t: _columns(-a * np.cos(t), -b * np.sin(t)),
        )
    )


def make_kite() -> BoundaryCurve:
    """``x(t) = (cos t + 0.65 cos 2t - 0.65, 1.5 sin t)``."""
    bulge, height = KITE_BULGE, KITE_HEIGHT
    return _validated(
        BoundaryCurve(
            kind="kite",
            params={},
            position=lambda t: _columns(
                np.cos(t) + bulge * np.cos(2 * t) - bulge, height * np.sin(t)
            ),
            velocity=lambda t: _columns(
                -np.sin(t) - 2 * bulge * np.sin(2 * t), height * np.cos(t)
            ),
            acceleration=lambda t: _columns(
                -np.cos(t) - 4 * bulge * np.cos(2 * t), -height * np.sin(t)
            ),
        )
    )


def make_fourier(coefficients: Sequence[float]) -> BoundaryCurve:
    """A star-shaped curve ``x(t) = r(t) (cos t, sin t)`` around the origin.

    The radius is the truncated series
    ``r(t) = a0 + sum_j (a_j cos jt + b_j sin jt)`` with coefficients given
    as ``[a0, a1, b1, a2, b2, ...]``.
    """
    coeffs = [float(c) for c in coefficients]
    if not coeffs:
        raise GeometryError("at least the constant Fourier coefficient is needed")
    if len(coeffs) % 2 == 0:
        coeffs.append(0.0)
    a = np.array([coeffs[0]] + coeffs[1::2])
    b = np.array([0.0] + coeffs[2::2])
    j = np.arange(len(a))

    def radius(t: NDArray, order: int) -> NDArray:
        angles = np.outer(t, j)
        # d^p/dt^p of cos and sin cycle with period four
        phase = order * np.pi / 2
        return (np.cos(angles + phase) * j**order) @ a + (
            np.sin(angles + phase) * j**order
        ) @ b

    t_check = np.linspace(0.0, 2 * np.pi, SCREEN_SAMPLES, endpoint=False)
    if float(np.min(radius(t_check, 0))) <= 0:
        raise GeometryError(f"Fourier radius {coeffs} is not positive everywhere")

    def position(t):
        r = radius(t, 0)
        return _columns(r * np.cos(t), r * np.sin(t))

    def velocity(t):
        r, dr = radius(t, 0), radius(t, 1)
        return _columns(dr * np.cos(t) - r * np.sin(t), dr * np.sin(t) + r * np.cos(t))

    def acceleration(t):
        r, dr, ddr = radius(t, 0), radius(t, 1), radius(t, 2)
        return _columns(
            (ddr - r) * np.cos(t) - 2 * dr * np.sin(t),
            (ddr - r) * np.sin(t) + 2 * dr * np.cos(t),
        )

    return _validated(
        BoundaryCurve(
            kind="fourier",
            params={"coefficients": coeffs},
            position=position,
            velocity=velocity,
            acceleration=acceleration,
        )
    )


def frame(curve: BoundaryCurve, t: ArrayLike) -> Frame:
    """Point, unit tangent, outward unit normal, jacobian ``|x'(t)|`` and
    signed curvature at the parameters ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    point = curve.position(t)
    dx = curve.velocity(t)
    ddx = curve.acceleration(t)
    jacobian = np.linalg.norm(dx, axis=-1)
    tangent = dx / jacobian[:, None]
    normal = _columns(tangent[:, 1], -tangent[:, 0])
    curvature = (dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / jacobian**3
    return Frame(point, tangent, normal, jacobian, curvature)


@attrs.frozen(eq=False)
class QuadratureGrid:
    """The ``2n`` equispaced nodes ``t_j = π j / n`` with their frames."""

    curve: BoundaryCurve
    n: int
    nodes: NDArray[np.float64]
    points: NDArray[np.float64]
    tangents: NDArray[np.float64]
    normals: NDArray[np.float64]
    jacobians: NDArray[np.float64]
    curvature: NDArray[np.float64]
    velocity: NDArray[np.float64]
    acceleration: NDArray[np.float64]

    @property
    def size(self) -> int:
        return 2 * self.n

    @property
    def weight(self) -> float:
        return math.pi / self.n

    @property
    def weights(self) -> NDArray[np.float64]:
        """Trapezoid weights with respect to arclength."""
        return self.weight * self.jacobians

    @property
    def exclusion_distance(self) -> float:
        """Points closer than this to the boundary are not evaluated."""
        return 3.0 * self.weight * float(np.max(self.jacobians))


def grid(curve: BoundaryCurve, n: int) -> QuadratureGrid:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise GeometryError(f"grid half-size must be an integer, got {n!r}")
    if n < MIN_GRID_HALF_SIZE:
        raise GeometryError(
            f"grid half-size n={n} is below the minimum {MIN_GRID_HALF_SIZE}"
        )
    nodes = np.pi * np.arange(2 * n) / n
    f = frame(curve, nodes)
    return QuadratureGrid(
        curve=curve,
        n=int(n),
        nodes=nodes,
        points=f.point,
        tangents=f.tangent,
        normals=f.normal,
        jacobians=f.jacobian,
        curvature=f.curvature,
        velocity=curve.velocity(nodes),
        acceleration=curve.acceleration(nodes),
    )


def _sample(curve: BoundaryCurve, count: int) -> NDArray[np.float64]:
    return curve.position(np.linspace(0.0, 2 * np.pi, count, endpoint=False))


def winding_number(curve: BoundaryCurve, points: ArrayLike) -> NDArray[np.int64]:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    polygon = _sample(curve, SCREEN_SAMPLES)
    total = np.empty(len(points))
    for start in range(0, len(points), 256):
        a = polygon[None, :, :] - points[start : start + 256, None, :]
        b = np.roll(a, -1, axis=1)
        cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
        dot = np.sum(a * b, axis=-1)
        total[start : start + 256] = np.sum(np.arctan2(cross, dot), axis=1)
    return np.rint(total / (2 * np.pi)).astype(np.int64)


def contains(curve: BoundaryCurve, points: ArrayLike) -> NDArray[np.bool_]:
    """Whether each point lies inside the obstacle."""
    return winding_number(curve, points) != 0


def distance_to_curve(curve: BoundaryCurve, points: ArrayLike) -> NDArray[np.float64]:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    samples = _sample(curve, DISTANCE_SAMPLES)
    result = np.empty(len(points))
    for start in range(0, len(points), 256):
        block = points[start : start + 256]
        diff = block[:, None, :] - samples[None, :, :]
        distances = np.hypot(diff[..., 0], diff[..., 1])
        result[start : start + 256] = np.min(distances, axis=1)
    return result
