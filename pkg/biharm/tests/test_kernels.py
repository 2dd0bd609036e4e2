# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import cmath
import math

import numpy as np
import pytest

from ..kernels import (
    Branch,
    CoincidentPointsError,
    FarFieldOverflowError,
    WaveNumber,
    biharm_g,
    biharm_grad_g,
    biharm_grad_lap_g,
    biharm_lap_g,
    d2phi_dnxdny,
    dphi_dn,
    dphi_radial,
    farfield_constants,
    ff_kernel_minus,
    ff_kernel_plus,
    grad_phi_y,
    hess_radial,
    phi,
    phi_radial,
)

BRANCHES = [
    pytest.param(WaveNumber.helmholtz(1.3), -(1.3**2), id="helmholtz"),
    pytest.param(WaveNumber.modified(1.3), 1.3**2, id="modified"),
    pytest.param(WaveNumber.laplace(), 0.0, id="laplace"),
]


def radial_laplacian(f, r, dim, h=1e-4):
    second = (f(r + h) - 2 * f(r) + f(r - h)) / h**2
    first = (f(r + h) - f(r - h)) / (2 * h)
    return second + (dim - 1) * first / r


@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("b, factor", BRANCHES)
def test_fundamental_solutions_solve_their_equation(b, factor, dim):
    r = np.array([0.3, 1.0, 2.7])
    # Δ = Φ'' + (d-1)Φ'/r and Φ'' = hess + Φ'/r
    laplacian = hess_radial(b, r, dim) + dim * dphi_radial(b, r, dim) / r
    np.testing.assert_allclose(
        laplacian, factor * phi_radial(b, r, dim), atol=1e-12, rtol=1e-10
    )


@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("b, factor", BRANCHES)
def test_radial_derivative(b, factor, dim):
    r, h = np.array([0.4, 1.1, 3.0]), 1e-6
    difference = (phi_radial(b, r + h, dim) - phi_radial(b, r - h, dim)) / (2 * h)
    np.testing.assert_allclose(dphi_radial(b, r, dim), difference, rtol=1e-7)


def test_normal_derivative_kernels():
    b = WaveNumber.helmholtz(2.0)
    x, y = np.array([0.4, -0.3]), np.array([1.2, 0.5])
    n_x = np.array([math.cos(0.7), math.sin(0.7)])
    n_y = np.array([math.cos(2.1), math.sin(2.1)])
    h = 1e-6
    dn_y = (phi(b, x, y + h * n_y) - phi(b, x, y - h * n_y)) / (2 * h)
    assert complex(dphi_dn(b, x, y, n_y)) == pytest.approx(complex(dn_y), rel=1e-7)
    dn_xy = (
        dphi_dn(b, x + h * n_x, y, n_y) - dphi_dn(b, x - h * n_x, y, n_y)
    ) / (2 * h)
    assert complex(d2phi_dnxdny(b, x, y, n_x, n_y)) == pytest.approx(
        complex(dn_xy), rel=1e-6
    )


def test_coincident_points():
    with pytest.raises(CoincidentPointsError):
        phi(WaveNumber.helmholtz(1.0), [0.5, 0.5], [0.5, 0.5])


@pytest.mark.parametrize("dim", [2, 3])
def test_biharmonic_kernel_equations(dim):
    k = 1.4
    r = np.array([0.5, 1.2, 3.3])
    np.testing.assert_allclose(
        radial_laplacian(lambda s: biharm_g(k, s, dim), r, dim),
        biharm_lap_g(k, r, dim),
        rtol=1e-6,
    )
    # Δ²G = k⁴G away from the source
    np.testing.assert_allclose(
        radial_laplacian(lambda s: biharm_lap_g(k, s, dim), r, dim),
        k**4 * biharm_g(k, r, dim),
        rtol=1e-6,
    )


@pytest.mark.parametrize(
    "dim, limit",
    [(2, lambda k: 1j / (8 * k**2)), (3, lambda k: (1 + 1j) / (8 * math.pi * k))],
)
def test_biharmonic_kernel_is_finite_at_origin(dim, limit):
    k = 0.9
    assert complex(biharm_g(k, 0.0, dim)) == pytest.approx(limit(k))
    assert complex(biharm_g(k, 1e-7, dim)) == pytest.approx(limit(k), rel=1e-6)


@pytest.mark.parametrize("dim", [2, 3])
def test_biharmonic_gradients(dim):
    k, h = 1.1, 1e-6
    x = np.array([0.7, -0.4, 0.3][:dim])
    y = np.array([-0.2, 0.5, -0.6][:dim])
    for axis in range(dim):
        e = np.zeros(dim)
        e[axis] = h
        for value, gradient in (
            (biharm_g, biharm_grad_g),
            (biharm_lap_g, biharm_grad_lap_g),
        ):
            difference = (
                value(k, np.linalg.norm(x + e - y), dim)
                - value(k, np.linalg.norm(x - e - y), dim)
            ) / (2 * h)
            assert complex(gradient(k, x, y)[axis]) == pytest.approx(
                complex(difference), rel=1e-6, abs=1e-10
            )


def test_farfield_constants_in_two_dimensions():
    k = 2.5
    c_minus, c_plus = farfield_constants(k, 2)
    expected = cmath.exp(0.25j * math.pi) / math.sqrt(8 * math.pi * k)
    assert c_minus == pytest.approx(expected)
    assert c_plus == pytest.approx(1 / math.sqrt(8 * math.pi * k))


def test_farfield_constants_in_three_dimensions():
    c_minus, c_plus = farfield_constants(1.7, 3)
    assert c_minus == pytest.approx(1 / (4 * math.pi))
    assert c_plus == pytest.approx(1 / (4 * math.pi))


def test_farfield_kernels_match_asymptotics():
    k, distance = 1.0, 500.0
    xhat = np.array([math.cos(0.8), math.sin(0.8)])
    y = np.array([[0.3, 0.2]])
    n_y = np.array([[1.0, 0.0]])
    x = distance * xhat
    _, minus = ff_kernel_minus(k, xhat, y, n_y)
    _, plus = ff_kernel_plus(k, xhat, y, n_y)
    far_minus = phi(WaveNumber.helmholtz(k), x, y[0]) * math.sqrt(distance)
    far_plus = phi(WaveNumber.modified(k), x, y[0]) * math.sqrt(distance)
    assert complex(far_minus * cmath.exp(-1j * k * distance)) == pytest.approx(
        complex(minus[0, 0]), rel=1e-3
    )
    assert complex(far_plus * math.exp(k * distance)) == pytest.approx(
        complex(plus[0, 0]), rel=1e-3
    )


def test_farfield_normal_derivative_kernels():
    k, h = 1.3, 1e-6
    xhat = np.array([[0.6, 0.8]])
    y = np.array([0.4, -0.1])
    n_y = np.array([math.cos(1.9), math.sin(1.9)])
    for kernel in (ff_kernel_minus, ff_kernel_plus):
        dn, _ = kernel(k, xhat, y[None, :], n_y[None, :])
        ahead = kernel(k, xhat, (y + h * n_y)[None, :], n_y[None, :])[1]
        behind = kernel(k, xhat, (y - h * n_y)[None, :], n_y[None, :])[1]
        assert complex(dn[0, 0]) == pytest.approx(
            complex((ahead - behind)[0, 0] / (2 * h)), rel=1e-7
        )


def test_modified_farfield_kernel_overflow():
    with pytest.raises(FarFieldOverflowError):
        ff_kernel_plus(1.0, [[1.0, 0.0]], [[700.0, 0.0]], [[1.0, 0.0]])


@pytest.mark.parametrize("b, factor", BRANCHES)
def test_grad_phi_y_matches_finite_differences(b, factor):
    x = np.array([0.3, -0.2])
    y = np.array([1.1, 0.7])
    h = 1e-6
    gradient = grad_phi_y(b, x, y)
    for axis in range(2):
        step = np.zeros(2)
        step[axis] = h
        difference = (phi(b, x, y + step) - phi(b, x, y - step)) / (2 * h)
        assert complex(gradient[axis]) == pytest.approx(complex(difference), rel=1e-7)


def test_wave_number_constructors():
    class Tagged(WaveNumber):
        pass

    assert WaveNumber.helmholtz(2.0).branch is Branch.HELMHOLTZ
    assert WaveNumber.modified(2.0) == WaveNumber(k=2.0, branch=Branch.MODIFIED)
    assert WaveNumber.laplace().k == 0.0
    assert isinstance(Tagged.modified(1.5), Tagged)
    with pytest.raises(ValueError, match="positive"):
        WaveNumber.helmholtz(0.0)
