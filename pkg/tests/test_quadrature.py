import numpy as np
import pytest

from splinecomplex.errors import SplineComplexError
from splinecomplex.quadrature import MAX_GAUSS_POINTS, gauss_rule, integrate


def test_midpoint_rule():
    rule = gauss_rule(1)
    np.testing.assert_allclose(rule.points, [0.5])
    np.testing.assert_allclose(rule.weights, [1.0])


def test_two_point_rule():
    rule = gauss_rule(2)
    offset = 1.0 / (2.0 * np.sqrt(3.0))
    np.testing.assert_allclose(rule.points, [0.5 - offset, 0.5 + offset], atol=1e-15)
    np.testing.assert_allclose(rule.weights, [0.5, 0.5], atol=1e-15)


@pytest.mark.parametrize("n", range(1, MAX_GAUSS_POINTS + 1))
def test_exact_for_degree_2n_minus_1(n):
    rule = gauss_rule(n)
    for degree in (0, n, 2 * n - 1):
        assert np.dot(rule.weights, rule.points ** degree) == pytest.approx(1.0 / (degree + 1), abs=1e-14)
    assert np.all(np.diff(rule.points) > 0)
    assert np.all(rule.weights > 0)


def test_rule_is_read_only():
    with pytest.raises(ValueError):
        gauss_rule(3).points[0] = 0.0


@pytest.mark.parametrize("n", [0, MAX_GAUSS_POINTS + 1])
def test_rule_size_out_of_range(n):
    with pytest.raises(SplineComplexError):
        gauss_rule(n)


def test_composite_integration():
    breakpoints = [0.0, 0.25, 0.5, 1.0]
    value = integrate(np.sin, 0.0, np.pi, gauss_rule(8))
    assert value == pytest.approx(2.0, abs=1e-9)
    # kinks at the breakpoints are integrated exactly
    kink = integrate(lambda x: np.abs(x - 0.25), 0.0, 1.0, gauss_rule(2), breakpoints)
    assert kink == pytest.approx(0.25 ** 2 / 2 + 0.75 ** 2 / 2, abs=1e-15)


@pytest.mark.parametrize("n", [3, 17, MAX_GAUSS_POINTS])
def test_rule_is_legendre_gauss_on_the_unit_interval(n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    rule = gauss_rule(n)
    np.testing.assert_allclose(rule.points, (nodes + 1.0) / 2.0, atol=1e-15)
    np.testing.assert_allclose(rule.weights, weights / 2.0, atol=1e-15)
    np.testing.assert_allclose(rule.points, 1.0 - rule.points[::-1], atol=1e-15)
