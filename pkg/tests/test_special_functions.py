import math

import mpmath
import pytest
import scipy.special as sc
from hypothesis import given, settings, strategies as st

from kissing.special_functions import beta, incomplete_beta, regularized_incomplete_beta


@pytest.mark.parametrize("y, z, expected", [
    (1, 0.5, 2.0),
    (1.5, 0.5, math.pi / 2),
    (1, 1, 1.0),
    (0.5, 0.5, math.pi),
])
def test_beta_closed_forms(y, z, expected):
    assert beta(y, z) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("args", [(0, 1), (1, 0), (-1, 2)])
def test_beta_domain(args):
    with pytest.raises(ValueError):
        beta(*args)


def test_incomplete_beta_examples():
    assert incomplete_beta(0.75, 1, 0.5) == pytest.approx(1.0, rel=1e-12)
    assert incomplete_beta(0.0, 2.5, 0.5) == 0.0
    expected = math.asin(math.sqrt(3) / 2) - math.sqrt(3) / 4
    assert incomplete_beta(0.75, 1.5, 0.5) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("x", [-0.1, 1.1, math.nan])
def test_incomplete_beta_domain(x):
    with pytest.raises(ValueError):
        incomplete_beta(x, 1, 1)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1))
def test_closed_forms_z_half(x):
    assert incomplete_beta(x, 1, 0.5) == pytest.approx(2 * (1 - math.sqrt(1 - x)), rel=1e-12, abs=1e-15)
    # atan2 keeps arcsin(sqrt x) accurate near x = 1
    expected = math.atan2(math.sqrt(x), math.sqrt(1 - x)) - math.sqrt(x * (1 - x))
    assert incomplete_beta(x, 1.5, 0.5) == pytest.approx(expected, rel=1e-12, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 15), st.floats(0.5, 15))
def test_endpoint_identity(y, z):
    assert abs(incomplete_beta(1.0, y, z) - beta(y, z)) <= 1e-12 * beta(y, z)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.5, 15), st.floats(0.5, 15))
def test_monotone_in_x(x1, x2, y, z):
    if x1 == x2:
        return
    x1, x2 = sorted((x1, x2))
    assert incomplete_beta(x1, y, z) <= incomplete_beta(x2, y, z)
    if x2 - x1 > 1e-6:
        assert incomplete_beta(x1, y, z) < incomplete_beta(x2, y, z)


@settings(max_examples=1000, deadline=None)
@given(st.floats(0.001, 0.999), st.floats(0.5, 15), st.floats(0.5, 15))
def test_matches_quadrature(x, y, z):
    mpmath.mp.dps = 30
    exact = mpmath.betainc(y, z, 0, x)
    assert incomplete_beta(x, y, z) == pytest.approx(float(exact), rel=1e-10)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 1), st.floats(0.5, 30), st.floats(0.5, 30))
def test_regularized_matches_scipy(x, y, z):
    assert regularized_incomplete_beta(x, y, z) == pytest.approx(sc.betainc(y, z, x), rel=1e-10, abs=1e-14)
