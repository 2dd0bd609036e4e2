# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Bessel, Hankel and Macdonald functions of integer order.

Evaluation is delegated to :py:mod:`scipy.special`. This module adds the
contract the rest of the package relies on: integer orders only, negative
orders through the reflection identities, strictly positive arguments, and
explicit exponential scaling for the modified functions.

>>> round(float(bessel_j(0, 1.0)), 12)
0.765197686558
>>> round(float(bessel_j(-1, 2.0) + bessel_j(1, 2.0)), 12)
0.0
"""

from __future__ import annotations

import logging
from typing import Callable, Dict

import numpy as np
from numpy.typing import ArrayLike, NDArray
import scipy.special as sc

logger = logging.getLogger(__name__)

# Beyond this argument e^x overflows double precision.
OVERFLOW_ARGUMENT = 700.0

FUNCTION_IDS = ("J", "Y", "H1", "I", "K", "h1", "k")


class SpecialFunctionDomainError(ValueError):
    """Raised for non-positive arguments or non-integer orders."""


class SpecialFunctionRangeError(ArithmeticError):
    """Raised when an unscaled modified Bessel function would overflow."""

    def __init__(self, function_id: str, order: int, argument: float):
        self.function_id = function_id
        self.order = order
        self.argument = argument

    def __str__(self) -> str:
        return (
            f"{self.function_id}_{self.order}({self.argument:g}) is out of "
            f"double precision range, request scaled=True"
        )


def _check_order(m) -> int:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
        raise SpecialFunctionDomainError(f"order must be an integer, got {m!r}")
    return int(m)


def _check_argument(x: ArrayLike) -> NDArray[np.float64]:
    values = np.asarray(x, dtype=np.float64)
    if np.any(~(values > 0)):
        raise SpecialFunctionDomainError(
            "argument must be strictly positive, got "
            f"{float(np.min(values)) if values.size else values!r}"
        )
    return values


def _check_range(function_id: str, m: int, x: NDArray[np.float64], scaled: bool):
    if not scaled and x.size and float(np.max(x)) > OVERFLOW_ARGUMENT:
        raise SpecialFunctionRangeError(function_id, m, float(np.max(x)))


def _result(values):
    return np.asarray(values)[()]


def bessel_j(m: int, x: ArrayLike):
    """Bessel function of the first kind, ``J_{-m} = (-1)^m J_m``."""
    m = _check_order(m)
    x = _check_argument(x)
    sign = -1.0 if m < 0 and m % 2 else 1.0
    return _result(sign * sc.jv(abs(m), x))


def bessel_y(m: int, x: ArrayLike):
    """Bessel function of the second kind, ``Y_{-m} = (-1)^m Y_m``."""
    m = _check_order(m)
    x = _check_argument(x)
    sign = -1.0 if m < 0 and m % 2 else 1.0
    return _result(sign * sc.yv(abs(m), x))


def hankel1(m: int, x: ArrayLike):
    """Hankel function of the first kind, ``H_m = J_m + i Y_m``."""
    return _result(bessel_j(m, x) + 1j * bessel_y(m, x))


def bessel_i(m: int, x: ArrayLike, scaled: bool = False):
    """Modified Bessel function of the first kind, even in the order.

    With ``scaled=True`` the value ``e^{-x} I_m(x)`` is returned."""
    m = _check_order(m)
    x = _check_argument(x)
    if scaled:
        return _result(sc.ive(abs(m), x))
    _check_range("I", m, x, scaled)
    return _result(sc.iv(abs(m), x))


def macdonald_k(m: int, x: ArrayLike, scaled: bool = False):
    """Macdonald function ``K_m``, even in the order.

    With ``scaled=True`` the value ``e^{x} K_m(x)`` is returned."""
    m = _check_order(m)
    x = _check_argument(x)
    if scaled:
        return _result(sc.kve(abs(m), x))
    _check_range("K", m, x, scaled)
    return _result(sc.kv(abs(m), x))


def spherical_j(ell: int, x: ArrayLike):
    ell = _check_order(ell)
    if ell < 0:
        raise SpecialFunctionDomainError("spherical orders must be non-negative")
    return _result(sc.spherical_jn(ell, _check_argument(x)))


def spherical_i(ell: int, x: ArrayLike):
    ell = _check_order(ell)
    if ell < 0:
        raise SpecialFunctionDomainError("spherical orders must be non-negative")
    x = _check_argument(x)
    _check_range("i", ell, x, False)
    return _result(sc.spherical_in(ell, x))


def spherical_h1(ell: int, x: ArrayLike):
    """Spherical Hankel function ``h_l = j_l + i y_l``."""
    ell = _check_order(ell)
    if ell < 0:
        raise SpecialFunctionDomainError("spherical orders must be non-negative")
    x = _check_argument(x)
    return _result(sc.spherical_jn(ell, x) + 1j * sc.spherical_yn(ell, x))


def spherical_k(ell: int, x: ArrayLike):
    """Modified spherical function ``k_l(x) = sqrt(pi/(2x)) K_{l+1/2}(x)``.

    This is the normalisation under which ``k_0(x) = pi e^{-x} / (2x)``."""
    ell = _check_order(ell)
    if ell < 0:
        raise SpecialFunctionDomainError("spherical orders must be non-negative")
    x = _check_argument(x)
    _check_range("k", ell, x, False)
    return _result(sc.spherical_kn(ell, x))


_CYLINDER: Dict[str, Callable] = {
    "J": bessel_j,
    "Y": bessel_y,
    "H1": hankel1,
    "I": bessel_i,
    "K": macdonald_k,
}

_SPHERICAL: Dict[str, Callable] = {
    "h1": lambda ell, x, derivative: sc.spherical_jn(ell, x, derivative)
    + 1j * sc.spherical_yn(ell, x, derivative),
    "k": lambda ell, x, derivative: sc.spherical_kn(ell, x, derivative),
}


def evaluate(function_id: str, m: int, x: ArrayLike):
    """Evaluates the function named by ``function_id`` (see :py:data:`FUNCTION_IDS`)."""
    if function_id in _CYLINDER:
        return _CYLINDER[function_id](m, x)
    if function_id == "h1":
        return spherical_h1(m, x)
    if function_id == "k":
        return spherical_k(m, x)
    raise SpecialFunctionDomainError(f"unknown function {function_id!r}")


def deriv(function_id: str, m: int, x: ArrayLike):
    """Derivative with respect to the argument.

    Cylinder functions ``J``, ``Y``, ``H1`` and ``I`` use
    ``f'_m = f_{m-1} - (m/x) f_m``; ``K`` uses ``K'_m = -(K_{m-1} + K_{m+1})/2``.
    """
    m = _check_order(m)
    if function_id in ("J", "Y", "H1", "I"):
        f = _CYLINDER[function_id]
        xs = _check_argument(x)
        return _result(f(m - 1, xs) - (m / xs) * f(m, xs))
    if function_id == "K":
        return _result(-0.5 * (macdonald_k(m - 1, x) + macdonald_k(m + 1, x)))
    if function_id in _SPHERICAL:
        if m < 0:
            raise SpecialFunctionDomainError("spherical orders must be non-negative")
        return _result(_SPHERICAL[function_id](m, _check_argument(x), True))
    raise SpecialFunctionDomainError(f"unknown function {function_id!r}")
