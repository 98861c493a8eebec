"""Complete and incomplete beta functions.

``incomplete_beta(x, y, z)`` is the unregularized integral
``int_0^x t^(y-1) (1-t)^(z-1) dt``.  It is evaluated with the modified Lentz
continued fraction, switching to the reflected integral when ``x`` lies past
the mean so that the fraction converges quickly.
"""
from __future__ import annotations

import math

_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 2000


def _check_shape(y: float, z: float) -> None:
    if not (y > 0 and z > 0):
        raise ValueError(f"beta parameters must be positive, got y={y}, z={z}")


def log_beta(y: float, z: float) -> float:
    _check_shape(y, z)
    return math.lgamma(y) + math.lgamma(z) - math.lgamma(y + z)


def beta(y: float, z: float) -> float:
    """B(y, z) = Gamma(y) Gamma(z) / Gamma(y + z)."""
    return math.exp(log_beta(y, z))


def _continued_fraction(x: float, y: float, z: float) -> float:
    # Lentz evaluation of the fraction in I_x(y, z) = x^y (1-x)^z / (y B) * cf
    qab, qap, qam = y + z, y + 1.0, y - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_TERMS + 1):
        m2 = 2 * m
        aa = m * (z - m) * x / ((qam + m2) * (y + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(y + m) * (qab + m) * x / ((y + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge at x={x}, y={y}, z={z}")


def _lower_tail(x: float, y: float, z: float) -> float:
    front = math.exp(y * math.log(x) + z * math.log1p(-x)) / y
    return front * _continued_fraction(x, y, z)


def incomplete_beta(x: float, y: float, z: float) -> float:
    """B(x; y, z) for 0 <= x <= 1 and y, z > 0."""
    _check_shape(y, z)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"incomplete beta needs 0 <= x <= 1, got x={x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return beta(y, z)
    if x < (y + 1.0) / (y + z + 2.0):
        return _lower_tail(x, y, z)
    return beta(y, z) - _lower_tail(1.0 - x, z, y)


def regularized_incomplete_beta(x: float, y: float, z: float) -> float:
    return incomplete_beta(x, y, z) / beta(y, z)
