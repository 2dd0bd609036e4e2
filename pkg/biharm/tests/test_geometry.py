# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import math

import numpy as np
import pytest
import scipy.integrate

from ..geometry import (
    GeometryError,
    contains,
    distance_to_curve,
    frame,
    grid,
    make_circle,
    make_ellipse,
    make_fourier,
    make_kite,
    winding_number,
)


def test_circle_frame():
    curve = make_circle(2.0, center=(1.0, -1.0))
    t = np.linspace(0, 2 * np.pi, 7)
    f = frame(curve, t)
    radial = np.stack([np.cos(t), np.sin(t)], axis=-1)
    np.testing.assert_allclose(f.point, [1.0, -1.0] + 2 * radial)
    np.testing.assert_allclose(f.normal, radial, atol=1e-15)
    np.testing.assert_allclose(f.jacobian, 2.0)
    np.testing.assert_allclose(f.curvature, 0.5)


def test_ellipse_curvature():
    a, b = 2.0, 0.5
    t = np.linspace(0, 2 * np.pi, 11)
    expected = a * b / (a**2 * np.sin(t) ** 2 + b**2 * np.cos(t) ** 2) ** 1.5
    np.testing.assert_allclose(frame(make_ellipse(a, b), t).curvature, expected)


@pytest.mark.parametrize(
    "curve",
    [
        pytest.param(make_kite(), id="kite"),
        pytest.param(make_ellipse(1.5, 0.7), id="ellipse"),
        pytest.param(make_fourier([1.0, 0.2, 0.0, 0.0, 0.1]), id="fourier"),
    ],
)
def test_normals_are_outward_unit_vectors(curve):
    f = frame(curve, np.linspace(0, 2 * np.pi, 50, endpoint=False))
    np.testing.assert_allclose(np.linalg.norm(f.normal, axis=-1), 1.0)
    np.testing.assert_allclose(np.sum(f.normal * f.tangent, axis=-1), 0.0, atol=1e-14)
    # a small step along the normal leaves the obstacle
    assert not np.any(contains(curve, f.point + 0.05 * f.normal))
    assert np.all(contains(curve, f.point - 0.05 * f.normal))


def test_grid_weights_integrate_arclength(kite):
    g = grid(kite, 64)
    length, _ = scipy.integrate.quad(
        lambda t: float(np.linalg.norm(kite.velocity(np.array([t]))[0])),
        0,
        2 * np.pi,
        limit=200,
        epsabs=1e-13,
    )
    assert g.size == 128
    assert g.weights.sum() == pytest.approx(length, rel=1e-11)
    assert g.exclusion_distance == pytest.approx(
        3 * math.pi / 64 * g.jacobians.max()
    )


def test_fourier_curve_matches_circle():
    curve = make_fourier([1.5])
    t = np.linspace(0, 2 * np.pi, 9)
    np.testing.assert_allclose(curve.position(t), frame(make_circle(1.5), t).point)
    assert curve.describe() == {"kind": "fourier", "coefficients": [1.5]}


def test_fourier_derivatives_match_finite_differences():
    curve = make_fourier([1.0, 0.1, -0.2, 0.05, 0.1])
    t, h = np.array([0.4, 2.0, 5.1]), 1e-6
    velocity = (curve.position(t + h) - curve.position(t - h)) / (2 * h)
    acceleration = (curve.velocity(t + h) - curve.velocity(t - h)) / (2 * h)
    np.testing.assert_allclose(curve.velocity(t), velocity, atol=1e-8)
    np.testing.assert_allclose(curve.acceleration(t), acceleration, atol=1e-8)


@pytest.mark.parametrize(
    "build",
    [
        pytest.param(lambda: make_circle(-1.0), id="negative_radius"),
        pytest.param(lambda: make_ellipse(1.0, 0.0), id="flat_ellipse"),
        pytest.param(lambda: make_fourier([]), id="no_coefficients"),
        pytest.param(lambda: make_fourier([0.2, 1.0]), id="negative_radius_series"),
        pytest.param(lambda: grid(make_kite(), 4), id="grid_too_small"),
        pytest.param(lambda: grid(make_kite(), 16.0), id="grid_not_integer"),
    ],
)
def test_invalid_geometry(build):
    with pytest.raises(GeometryError):
        build()


def test_kite_inside_outside(kite):
    points = [(0.0, 0.0), (3.0, 0.0), (-1.1, 0.0), (-1.0, 1.0)]
    assert contains(kite, points).tolist() == [True, False, False, True]
    assert winding_number(kite, points).tolist() == [1, 0, 0, 1]


def test_distance_to_circle(unit_circle):
    distance = distance_to_curve(unit_circle, [(2.0, 0.0), (0.0, -3.5), (0.5, 0.0)])
    np.testing.assert_allclose(distance, [1.0, 2.5, 0.5], atol=1e-5)
