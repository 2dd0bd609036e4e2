# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import logging
import math

import numpy as np
import pytest
import scipy.special as sc

from ..bie import (
    DirichletData,
    Operator,
    OperatorError,
    SingularSystemError,
    SolverAccuracyError,
    SolverConfig,
    SystemMatrix,
    assemble,
    dirichlet_data,
    discretize_op,
    hypersingular,
    kress_weights,
    rhs_from_incident,
    singular_values,
    solve,
    spectral_derivative,
)
from ..geometry import grid
from ..incident import IncidentField, IncidentKind
from ..kernels import WaveNumber

K = 1.2
ORDERS = range(-3, 7)


@pytest.fixture(scope="module")
def circle_grid(unit_circle):
    return grid(unit_circle, 32)


def circle_symbols(k):
    """Eigenvalues of the boundary operators on the unit circle, per order."""
    c = 0.5j * math.pi

    def t_k(m):
        return c * k**2 * sc.jvp(m, k) * sc.h1vp(m, k)

    def t_ik(m):
        return k**2 * sc.ivp(m, k) * sc.kvp(m, k)

    return {
        (Operator.SINGLE_LAYER, "k"): lambda m: c * sc.jv(m, k) * sc.hankel1(m, k),
        (Operator.SINGLE_LAYER, "ik"): lambda m: sc.iv(m, k) * sc.kv(m, k),
        (Operator.DOUBLE_LAYER, "k"): lambda m: (
            c * k * sc.jvp(m, k) * sc.hankel1(m, k) - 0.5
        ),
        (Operator.DOUBLE_LAYER, "ik"): lambda m: k * sc.ivp(m, k) * sc.kv(m, k) - 0.5,
        (Operator.ADJOINT_DOUBLE_LAYER, "k"): lambda m: (
            c * k * sc.jv(m, k) * sc.h1vp(m, k) + 0.5
        ),
        (Operator.ADJOINT_DOUBLE_LAYER, "ik"): lambda m: (
            k * sc.iv(m, k) * sc.kvp(m, k) + 0.5
        ),
        (Operator.HYPERSINGULAR_DIFFERENCE, "k"): lambda m: t_ik(m) - t_k(m),
        ("hypersingular", "k"): t_k,
        ("hypersingular", "ik"): t_ik,
    }


@pytest.mark.parametrize(
    "op, branch",
    [
        (Operator.SINGLE_LAYER, "k"),
        (Operator.SINGLE_LAYER, "ik"),
        (Operator.DOUBLE_LAYER, "k"),
        (Operator.DOUBLE_LAYER, "ik"),
        (Operator.ADJOINT_DOUBLE_LAYER, "k"),
        (Operator.ADJOINT_DOUBLE_LAYER, "ik"),
        (Operator.HYPERSINGULAR_DIFFERENCE, "k"),
    ],
)
def test_operators_diagonalise_on_circle(circle_grid, op, branch):
    b = WaveNumber.helmholtz(K) if branch == "k" else WaveNumber.modified(K)
    matrix = discretize_op(op, b, circle_grid)
    symbol = circle_symbols(K)[op, branch]
    for m in ORDERS:
        mode = np.exp(1j * m * circle_grid.nodes)
        np.testing.assert_allclose(matrix @ mode, symbol(abs(m)) * mode, atol=1e-8)


def test_laplace_single_layer_on_circle(circle_grid):
    matrix = discretize_op(Operator.SINGLE_LAYER, WaveNumber.laplace(), circle_grid)
    for m in ORDERS:
        mode = np.exp(1j * m * circle_grid.nodes)
        expected = 0.0 if m == 0 else 1 / (2 * abs(m))
        np.testing.assert_allclose(matrix @ mode, expected * mode, atol=1e-10)


def test_laplace_branch_rejects_other_operators(circle_grid):
    with pytest.raises(OperatorError):
        discretize_op(Operator.DOUBLE_LAYER, WaveNumber.laplace(), circle_grid)
    with pytest.raises(OperatorError):
        hypersingular(WaveNumber.laplace(), circle_grid)


@pytest.mark.parametrize("n", [8, 16, 33])
def test_kress_weights_integrate_trigonometric_polynomials(n):
    weights = kress_weights(n)
    nodes = np.pi * np.arange(2 * n) / n
    assert weights @ np.ones(2 * n) == pytest.approx(0.0, abs=1e-12)
    for m in range(1, n):
        assert weights @ np.cos(m * nodes) == pytest.approx(-2 * np.pi / m, rel=1e-12)
        assert weights @ np.sin(m * nodes) == pytest.approx(0.0, abs=1e-12)


def test_spectral_derivative():
    nodes = 2 * np.pi * np.arange(32) / 32
    f = np.sin(3 * nodes) + np.cos(nodes)
    df = 3 * np.cos(3 * nodes) - np.sin(nodes)
    np.testing.assert_allclose(spectral_derivative(32) @ f, df, atol=1e-12)


@pytest.mark.parametrize("n", [64, 96])
def test_hypersingular_difference_agrees_with_maue(kite, n):
    g = grid(kite, n)
    direct = discretize_op(
        Operator.HYPERSINGULAR_DIFFERENCE, WaveNumber.helmholtz(K), g
    )
    maue = hypersingular(WaveNumber.modified(K), g) - hypersingular(
        WaveNumber.helmholtz(K), g
    )
    density = np.exp(np.cos(g.nodes)) * (1 + 0.5j * np.sin(2 * g.nodes))
    np.testing.assert_allclose(
        direct @ density,
        maue @ density,
        atol=1e-6 * np.max(np.abs(direct @ density)),
    )


def test_hypersingular_on_circle(circle_grid):
    symbols = circle_symbols(K)
    for b, branch in (
        (WaveNumber.helmholtz(K), "k"),
        (WaveNumber.modified(K), "ik"),
    ):
        symbol = symbols["hypersingular", branch]
        matrix = hypersingular(b, circle_grid)
        for m in ORDERS:
            mode = np.exp(1j * m * circle_grid.nodes)
            np.testing.assert_allclose(
                matrix @ mode, symbol(abs(m)) * mode, atol=1e-8 * max(1, m**2)
            )


def test_assembly_with_workers_matches_serial(kite):
    serial = assemble(kite, SolverConfig(k=K, n=16))
    threaded = assemble(kite, SolverConfig(k=K, n=16, workers=3))
    np.testing.assert_allclose(threaded.matrix, serial.matrix, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        pytest.param({"k": 1.0, "eta": 0.0}, id="zero_eta"),
        pytest.param({"k": 0.0}, id="zero_k"),
        pytest.param({"k": -1.0}, id="negative_k"),
        pytest.param({"k": 1.0, "n": 4}, id="small_n"),
        pytest.param({"k": 1.0, "n": 16.5}, id="fractional_n"),
        pytest.param({"k": 1.0, "workers": 0}, id="no_workers"),
    ],
)
def test_solver_config_validation(kwargs):
    with pytest.raises((ValueError, TypeError)):
        SolverConfig(**kwargs)


def test_dirichlet_data_rhs():
    data = DirichletData(f=np.array([1.0, 2.0]), g=np.array([3.0j, 0.0]))
    np.testing.assert_allclose(data.rhs(2.0), [8.0, 16.0, -24.0j, 0.0])


def test_point_source_inside_obstacle_is_rejected(kite_matrix):
    incident = IncidentField(IncidentKind.POINTSOURCE_K, 1.0, source=(0.0, 0.0))
    with pytest.raises(OperatorError):
        dirichlet_data(incident, kite_matrix.grid)


def test_wave_number_mismatch_is_rejected(kite_matrix):
    incident = IncidentField(IncidentKind.PLANEWAVE_K, 2.0, direction=0.0)
    with pytest.raises(OperatorError):
        rhs_from_incident(incident, kite_matrix.grid, 1.0)


def test_solve_residual_and_condition(kite_densities, kite_matrix):
    assert kite_densities.residual < 1e-12
    true_condition = np.linalg.cond(kite_matrix.matrix, 1)
    assert 0.1 <= kite_densities.condition / true_condition <= 10


def test_solve_zero_rhs(kite_matrix):
    densities = solve(kite_matrix, np.zeros(2 * kite_matrix.grid.size))
    assert not np.any(densities.phi)
    assert not np.any(densities.psi)
    assert not np.any(densities.phi_plus)
    assert densities.residual == 0.0


def test_solve_rejects_wrong_rhs_length(kite_matrix):
    with pytest.raises(OperatorError):
        solve(kite_matrix, np.ones(3))


def test_solve_logs_timing(kite_matrix, caplog):
    with caplog.at_level(logging.INFO, logger="biharm.bie"):
        solve(kite_matrix, np.ones(2 * kite_matrix.grid.size))
    assert any("residual" in record.message for record in caplog.records)
    assert all(hasattr(record, "style") for record in caplog.records)


def test_singular_matrix_is_reported(kite_matrix):
    singular = SystemMatrix(
        matrix=np.zeros_like(kite_matrix.matrix),
        grid=kite_matrix.grid,
        config=kite_matrix.config,
        single_layer_laplace=kite_matrix.single_layer_laplace,
    )
    with pytest.raises(SingularSystemError):
        solve(singular, np.ones(2 * kite_matrix.grid.size))


def test_inaccurate_solve_is_reported(kite_matrix):
    strict = SystemMatrix(
        matrix=kite_matrix.matrix,
        grid=kite_matrix.grid,
        config=SolverConfig(k=1.0, n=64, residual_tolerance=0.0),
        single_layer_laplace=kite_matrix.single_layer_laplace,
    )
    with pytest.raises(SolverAccuracyError):
        solve(strict, np.ones(2 * kite_matrix.grid.size))


@pytest.mark.parametrize("k", [0.8, 1.0, 1.5])
def test_kite_system_is_well_conditioned(kite, k):
    mat = assemble(kite, SolverConfig(k=k, eta=1.0, n=64))
    assert singular_values(mat)[-1] > 1e-8
