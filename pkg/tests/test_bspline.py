from fractions import Fraction

import numpy as np
import pytest
from scipy.interpolate import BSpline

from splinecomplex.bspline import (
    Spline1D,
    SplineSpace1D,
    antiderivative,
    antiderivative_sampler,
    apply_tensor_product,
    basis_matrix,
    cumulative_integral,
    derivative,
    derivative_matrix,
    eval_basis,
    eval_spline,
    evaluate_tensor,
    evaluate_tensor_grid,
)
from splinecomplex.errors import EvaluationDomainError, SpaceMismatchError
from splinecomplex.knots import KnotVector, make_knots
from splinecomplex.quadrature import gauss_rule
from tests.helpers import random_knots


def cox_de_boor(t, p, i, x):
    """Exact recursion on fractions, right-continuous, for x in [0, 1)."""
    if p == 0:
        return Fraction(1) if t[i] <= x < t[i + 1] else Fraction(0)
    out = Fraction(0)
    if t[i + p] != t[i]:
        out += (x - t[i]) / (t[i + p] - t[i]) * cox_de_boor(t, p - 1, i, x)
    if t[i + p + 1] != t[i + 1]:
        out += (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * cox_de_boor(t, p - 1, i + 1, x)
    return out


def space(degree, *knots):
    return SplineSpace1D(knots=KnotVector(degree=degree, knots=tuple(float(t) for t in knots)))


@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_basis_matches_rational_recursion(degree, rng):
    kv = random_knots(degree, 4, rng)
    t = [Fraction(x) for x in kv.knots]
    x = rng.uniform(0.0, 1.0, size=20)
    B = basis_matrix(kv, x)
    for m, xm in enumerate(x):
        exact = [float(cox_de_boor(t, degree, i, Fraction(xm))) for i in range(kv.dimension)]
        np.testing.assert_allclose(B[m], exact, atol=1e-13)


@pytest.mark.parametrize("degree", [1, 2, 3])
def test_spline_matches_scipy(degree, rng):
    kv = random_knots(degree, 5, rng)
    c = rng.standard_normal(kv.dimension)
    x = np.concatenate([rng.uniform(0.0, 1.0, size=30), [0.0]])
    f = Spline1D(SplineSpace1D(knots=kv), c)
    np.testing.assert_allclose(f(x), BSpline(kv.array, c, degree)(x), atol=1e-13)


def test_eval_basis_examples():
    assert eval_basis(space(0, 0, 0.5, 1), 0.25) == (0, [1.0])
    first, values = eval_basis(space(1, 0, 0, 0.5, 1, 1), 0.25)
    assert first == 0
    np.testing.assert_allclose(values, [0.5, 0.5])
    for p in (1, 2, 3):
        first, values = eval_basis(SplineSpace1D(knots=make_knots(p, 3)), 0.0)
        assert first == 0
        np.testing.assert_allclose(values, [1.0] + [0.0] * p)


def test_eval_basis_outside_domain():
    with pytest.raises(EvaluationDomainError):
        eval_basis(space(1, 0, 0, 1, 1), 1.5)


def test_partition_of_unity_and_last_point(rng):
    kv = random_knots(3, 6, rng)
    x = np.concatenate([rng.uniform(0.0, 1.0, size=50), [1.0]])
    np.testing.assert_allclose(basis_matrix(kv, x).sum(axis=1), 1.0, atol=1e-14)
    assert basis_matrix(kv, [1.0])[0, -1] == pytest.approx(1.0)


def test_hat_function():
    hat = Spline1D(space(1, 0, 0, 0.5, 1, 1), [0.0, 1.0, 0.0])
    assert eval_spline(hat, 0.25) == pytest.approx(0.5)
    assert eval_spline(hat, 0.5) == pytest.approx(1.0)


def test_coefficient_shape_checked():
    with pytest.raises(SpaceMismatchError):
        Spline1D(space(1, 0, 0, 0.5, 1, 1), [1.0, 2.0])


def test_derivative_of_hat():
    d = derivative(Spline1D(space(1, 0, 0, 0.5, 1, 1), [0.0, 1.0, 0.0]))
    assert d.space.degree == 0
    assert d.space.knots.knots == (0.0, 0.5, 1.0)
    np.testing.assert_allclose(d.coefficients, [2.0, -2.0])


def test_derivative_of_constant_is_zero():
    d = derivative(Spline1D(SplineSpace1D(knots=make_knots(3, 4)), np.full(7, 3.0)))
    np.testing.assert_array_equal(d.coefficients, 0.0)


@pytest.mark.parametrize("degree", [1, 2, 3])
def test_derivative_matches_scipy(degree, rng):
    kv = random_knots(degree, 4, rng)
    c = rng.standard_normal(kv.dimension)
    x = rng.uniform(0.0, 1.0, size=25)
    d = derivative(Spline1D(SplineSpace1D(knots=kv), c))
    np.testing.assert_allclose(d(x), BSpline(kv.array, c, degree).derivative()(x), atol=1e-11)
    np.testing.assert_allclose(derivative_matrix(kv) @ c, d.coefficients)


def test_antiderivative_of_one_is_identity():
    one = Spline1D(space(0, 0, 0.5, 1), [1.0, 1.0])
    F = antiderivative(one)
    assert F.space.degree == 1
    np.testing.assert_allclose(F.coefficients, [0.0, 0.5, 1.0])
    zero = antiderivative(Spline1D(one.space, [0.0, 0.0]))
    np.testing.assert_array_equal(zero.coefficients, 0.0)


@pytest.mark.parametrize("degree", [1, 2, 3])
def test_antiderivative_inverts_derivative(degree, rng):
    primal = SplineSpace1D(knots=random_knots(degree, 3, rng))
    g = Spline1D(primal.truncated(), rng.standard_normal(primal.dimension - 1))
    F = antiderivative(g, primal)
    assert F.coefficients[0] == 0.0
    np.testing.assert_allclose(derivative(F).coefficients, g.coefficients, atol=1e-12)


def test_antiderivative_space_mismatch():
    g = Spline1D(space(0, 0, 0.5, 1), [1.0, 1.0])
    with pytest.raises(SpaceMismatchError):
        antiderivative(g, SplineSpace1D(knots=make_knots(1, 3)))


def test_cumulative_integral():
    rule = gauss_rule(8)
    assert cumulative_integral(lambda t: np.ones_like(t), 0.3, rule) == pytest.approx(0.3)
    assert cumulative_integral(lambda t: 2 * t, 0.7, rule) == pytest.approx(0.49)
    assert cumulative_integral(lambda t: np.sin(np.pi * t), 1.0, rule) == pytest.approx(2 / np.pi, abs=1e-12)
    assert cumulative_integral(np.cos, 0.0, rule) == 0.0


def test_antiderivative_sampler_is_exact_on_polynomials():
    breakpoints = np.array([0.0, 0.25, 0.5, 1.0])
    targets = np.array([0.0, 0.1, 0.25, 0.6, 1.0])
    nodes, W = antiderivative_sampler(breakpoints, targets, 6)
    np.testing.assert_allclose(W @ (5 * nodes ** 4), targets ** 5, atol=1e-13)
    np.testing.assert_allclose(W @ np.ones_like(nodes), targets, atol=1e-14)


def test_tensor_contraction_matches_outer_products(rng):
    A, B = rng.standard_normal((3, 4)), rng.standard_normal((2, 5))
    values = rng.standard_normal((4, 5))
    np.testing.assert_allclose(apply_tensor_product([A, B], values), A @ values @ B.T)


def test_tensor_grid_and_point_evaluation_agree(rng):
    factors = [make_knots(2, 3), make_knots(1, 2)]
    c = rng.standard_normal((5, 3))
    x, y = rng.uniform(size=7), rng.uniform(size=4)
    grid = evaluate_tensor_grid(c, factors, [x, y])
    X, Y = np.meshgrid(x, y, indexing="ij")
    np.testing.assert_allclose(evaluate_tensor(c, factors, X, Y), grid, atol=1e-14)
    xs, ys = np.meshgrid(x, y, indexing="ij", sparse=True)
    np.testing.assert_allclose(evaluate_tensor(c, factors, xs, ys), grid, atol=1e-14)
