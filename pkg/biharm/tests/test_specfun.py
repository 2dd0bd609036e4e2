# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

import math

import numpy as np
import pytest

from ..specfun import (
    FUNCTION_IDS,
    SpecialFunctionDomainError,
    SpecialFunctionRangeError,
    bessel_i,
    bessel_j,
    bessel_y,
    deriv,
    evaluate,
    hankel1,
    macdonald_k,
    spherical_h1,
    spherical_k,
)


@pytest.mark.parametrize(
    "function_id, order, x, expected",
    [
        ("J", 0, 1.0, 0.7651976865579666),
        ("J", 1, 1.0, 0.44005058574493355),
        ("Y", 0, 1.0, 0.08825696421567696),
        ("I", 0, 1.0, 1.2660658777520082),
        ("K", 0, 1.0, 0.42102443824070834),
        ("K", 1, 1.0, 0.6019072301972346),
    ],
)
def test_evaluate_reference_values(function_id, order, x, expected):
    assert float(evaluate(function_id, order, x)) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("order", [1, 2, 3, 6])
def test_negative_orders_use_reflection(order):
    x = np.array([0.3, 2.5, 11.0])
    sign = (-1) ** order
    np.testing.assert_allclose(bessel_j(-order, x), sign * bessel_j(order, x))
    np.testing.assert_allclose(bessel_y(-order, x), sign * bessel_y(order, x))
    np.testing.assert_allclose(bessel_i(-order, x), bessel_i(order, x))
    np.testing.assert_allclose(macdonald_k(-order, x), macdonald_k(order, x))


def test_hankel_combines_first_and_second_kind():
    x = np.linspace(0.1, 30, 17)
    np.testing.assert_allclose(hankel1(3, x), bessel_j(3, x) + 1j * bessel_y(3, x))


WRONSKIAN_ORDERS = [-20, -13, -7, -1, 0, 1, 2, 5, 10, 15, 20]
WRONSKIAN_ARGUMENTS = np.geomspace(0.1, 50.0, 41)


@pytest.mark.parametrize("order", WRONSKIAN_ORDERS)
def test_cylinder_wronskians(order):
    x = WRONSKIAN_ARGUMENTS
    jy = bessel_j(order, x) * deriv("Y", order, x) - deriv("J", order, x) * bessel_y(
        order, x
    )
    assert np.max(np.abs(jy - 2 / (math.pi * x))) < 1e-12
    ik = bessel_i(order, x) * deriv("K", order, x) - deriv("I", order, x) * macdonald_k(
        order, x
    )
    assert np.max(np.abs(ik + 1 / x)) < 1e-12


@pytest.mark.parametrize("function_id", FUNCTION_IDS)
def test_derivative_matches_finite_difference(function_id):
    x, h = 1.7, 1e-6
    difference = (evaluate(function_id, 2, x + h) - evaluate(function_id, 2, x - h)) / (
        2 * h
    )
    assert complex(deriv(function_id, 2, x)) == pytest.approx(
        complex(difference), rel=1e-7
    )


def test_spherical_closed_forms():
    x = np.array([0.2, 1.0, 7.5])
    np.testing.assert_allclose(spherical_h1(0, x), -1j * np.exp(1j * x) / x)
    np.testing.assert_allclose(spherical_k(0, x), math.pi * np.exp(-x) / (2 * x))


@pytest.mark.parametrize(
    "call",
    [
        pytest.param(lambda: bessel_j(0, 0.0), id="zero_argument"),
        pytest.param(lambda: macdonald_k(1, -2.0), id="negative_argument"),
        pytest.param(lambda: bessel_j(1.5, 1.0), id="fractional_order"),
        pytest.param(lambda: spherical_h1(-1, 1.0), id="negative_spherical_order"),
        pytest.param(lambda: evaluate("Z", 0, 1.0), id="unknown_function"),
    ],
)
def test_domain_errors(call):
    with pytest.raises(SpecialFunctionDomainError):
        call()


def test_unscaled_modified_functions_refuse_overflow():
    with pytest.raises(SpecialFunctionRangeError) as excinfo:
        bessel_i(0, 800.0)
    assert excinfo.value.function_id == "I"
    assert "scaled=True" in str(excinfo.value)
    with pytest.raises(SpecialFunctionRangeError):
        macdonald_k(0, 800.0)


def test_scaled_modified_functions():
    x = 800.0
    asymptotic = math.sqrt(math.pi / (2 * x))
    assert float(macdonald_k(0, x, scaled=True)) == pytest.approx(asymptotic, rel=1e-3)
    assert float(bessel_i(0, x, scaled=True)) == pytest.approx(
        1 / math.sqrt(2 * math.pi * x), rel=1e-3
    )


def test_scalar_in_scalar_out():
    assert np.ndim(bessel_j(0, 1.0)) == 0
    assert np.shape(bessel_j(0, [1.0, 2.0])) == (2,)
