"""Univariate B-splines: evaluation, coefficient-level calculus and the
tensor-product contractions built on them.

Basis functions are right-continuous at interior knots; ``x = 1`` belongs to
the last element so point evaluation is defined on all of [0, 1].
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import legendre
from pydantic import BaseModel, ConfigDict

from splinecomplex.errors import EvaluationDomainError, KnotVectorError, SpaceMismatchError
from splinecomplex.knots import KnotVector
from splinecomplex.quadrature import QuadratureRule, gauss_rule

logger = logging.getLogger(__name__)


class SplineSpace1D(BaseModel):
    knots: KnotVector

    model_config = ConfigDict(frozen=True)

    @property
    def degree(self) -> int:
        return self.knots.degree

    @property
    def dimension(self) -> int:
        return self.knots.dimension

    def truncated(self) -> "SplineSpace1D":
        return SplineSpace1D(knots=self.knots.truncate())


SpaceLike = Union[SplineSpace1D, KnotVector]


def _knots(space: SpaceLike) -> KnotVector:
    return space.knots if isinstance(space, SplineSpace1D) else space


@dataclass(frozen=True)
class Spline1D:
    space: SplineSpace1D
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (self.space.dimension,):
            raise SpaceMismatchError(
                f"expected {self.space.dimension} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coefficients", c)

    def __call__(self, x):
        return eval_spline(self, x)


def basis_values(kv: KnotVector, x) -> Tuple[np.ndarray, np.ndarray]:
    """Spans and values of the ``p + 1`` active basis functions at every point.

    Returns ``spans`` with the shape of ``x`` and values of shape
    ``x.shape + (p + 1,)``; value ``r`` belongs to basis function
    ``spans - p + r``.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    p = kv.degree
    t = kv.array
    spans = kv.find_spans(x)

    values = np.zeros((x.size, p + 1))
    values[:, 0] = 1.0
    left = np.zeros((x.size, p + 1))
    right = np.zeros((x.size, p + 1))
    for j in range(1, p + 1):
        left[:, j] = x - t[spans + 1 - j]
        right[:, j] = t[spans + j] - x
        saved = np.zeros(x.size)
        for r in range(j):
            temp = values[:, r] / (right[:, r + 1] + left[:, j - r])
            values[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        values[:, j] = saved
    return spans.reshape(shape), values.reshape(shape + (p + 1,))


def basis_matrix(kv: KnotVector, x) -> np.ndarray:
    """Dense collocation matrix ``B[m, i] = b_i(x_m)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    spans, values = basis_values(kv, x)
    p = kv.degree
    matrix = np.zeros((x.size, kv.dimension))
    columns = spans[:, None] - p + np.arange(p + 1)[None, :]
    matrix[np.arange(x.size)[:, None], columns] = values
    return matrix


def eval_basis(space: SpaceLike, x: float) -> Tuple[int, List[float]]:
    """Index of the first active basis function at ``x`` and the ``p + 1`` values."""
    kv = _knots(space)
    if not 0.0 <= x <= 1.0:
        raise EvaluationDomainError(f"x = {x} lies outside [0, 1]")
    spans, values = basis_values(kv, x)
    return int(spans) - kv.degree, values.tolist()


def eval_spline(f: Spline1D, x):
    kv = f.space.knots
    spans, values = basis_values(kv, x)
    idx = spans[..., None] - kv.degree + np.arange(kv.degree + 1)
    result = np.sum(values * f.coefficients[idx], axis=-1)
    return float(result) if result.ndim == 0 else result


def derivative_scaling(kv: KnotVector) -> np.ndarray:
    """Factors ``p / (xi_{i+p+1} - xi_{i+1})`` of the bidiagonal derivative map."""
    p = kv.degree
    if p == 0:
        raise KnotVectorError("degree 0 splines have no spline derivative")
    t = kv.array
    i = np.arange(kv.dimension - 1)
    denom = t[i + p + 1] - t[i + 1]
    with np.errstate(divide="ignore"):
        return np.where(denom > 0, p / np.where(denom > 0, denom, 1.0), 0.0)


def derivative_matrix(kv: KnotVector) -> np.ndarray:
    """``(k - 1) x k`` matrix taking coefficients on ``kv`` to derivative coefficients."""
    alpha = derivative_scaling(kv)
    k = kv.dimension
    matrix = np.zeros((k - 1, k))
    rows = np.arange(k - 1)
    matrix[rows, rows] = -alpha
    matrix[rows, rows + 1] = alpha
    return matrix


def differentiate_along(coefficients: np.ndarray, kv: KnotVector, axis: int) -> np.ndarray:
    """Apply the univariate derivative map along one axis of a coefficient array."""
    coefficients = np.asarray(coefficients)
    if coefficients.shape[axis] != kv.dimension:
        raise SpaceMismatchError(
            f"axis {axis} has {coefficients.shape[axis]} coefficients, knots carry {kv.dimension}"
        )
    shape = [1] * coefficients.ndim
    shape[axis] = -1
    return np.diff(coefficients, axis=axis) * derivative_scaling(kv).reshape(shape)


def derivative(f: Spline1D) -> Spline1D:
    kv = f.space.knots
    return Spline1D(f.space.truncated(), differentiate_along(f.coefficients, kv, 0))


def antiderivative(g: Spline1D, space: Optional[SplineSpace1D] = None) -> Spline1D:
    """The spline ``F`` on the primal space with ``F(0) = 0`` and ``F' = g``."""
    if space is None:
        truncated = g.space.knots
        space = SplineSpace1D(knots=KnotVector(
            degree=truncated.degree + 1,
            knots=(0.0,) + truncated.knots + (1.0,),
        ))
    elif space.degree == 0 or not space.knots.truncate().matches(g.space.knots):
        raise SpaceMismatchError("the derivative space of the target does not match the input spline")
    steps = g.coefficients / derivative_scaling(space.knots)
    return Spline1D(space, np.concatenate([[0.0], np.cumsum(steps)]))


def cumulative_integral(
    f: Callable,
    x: float,
    rule: Optional[QuadratureRule] = None,
    breakpoints: Optional[Sequence[float]] = None,
) -> float:
    """``int_0^x f`` by composite Gauss quadrature, splitting the element containing ``x``."""
    rule = gauss_rule(8) if rule is None else rule
    if not 0.0 <= x <= 1.0:
        raise EvaluationDomainError(f"x = {x} lies outside [0, 1]")
    b = np.array([0.0, 1.0]) if breakpoints is None else np.asarray(breakpoints, dtype=float)
    cuts = np.concatenate([b[b < x], [x]])
    if cuts.size < 2:
        return 0.0
    points, weights = rule.composite(cuts)
    return float(np.dot(weights, np.asarray(f(points), dtype=float) * np.ones_like(points)))


def antiderivative_sampler(breakpoints: Sequence[float], targets, n_points: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sample nodes ``y`` and a matrix ``W`` with ``W @ f(y) ~ int_0^{x_j} f`` for every target.

    Each element carries ``n_points`` Gauss nodes. Elements left of a target
    use the Gauss weights; the element holding the target is integrated by
    the interpolating polynomial through its nodes, which is exact for
    polynomials of degree ``n_points - 1`` on that element.
    """
    b = np.asarray(breakpoints, dtype=float)
    targets = np.asarray(targets, dtype=float)
    rule = gauss_rule(n_points)
    h = np.diff(b)
    n_el = h.size
    nodes = (b[:-1, None] + h[:, None] * rule.points[None, :]).ravel()

    # Legendre coefficients of the Lagrange polynomials on the reference nodes
    z = 2.0 * rule.points - 1.0
    lagrange = np.linalg.inv(legendre.legvander(z, n_points - 1))
    primitive = legendre.legint(lagrange, lbnd=-1, axis=0)

    full = h[:, None] * rule.weights[None, :]
    matrix = np.zeros((targets.size, n_el * n_points))
    owner = np.clip(np.searchsorted(b, targets, side="right") - 1, 0, n_el - 1)
    for j, (x, e) in enumerate(zip(targets, owner)):
        matrix[j, : e * n_points] = full[:e].ravel()
        s = (x - b[e]) / h[e]
        matrix[j, e * n_points:(e + 1) * n_points] = 0.5 * h[e] * legendre.legval(2.0 * s - 1.0, primitive)
    return nodes, matrix


def apply_tensor_product(matrices: Sequence[np.ndarray], values: np.ndarray) -> np.ndarray:
    """Contract axis ``a`` of ``values`` with ``matrices[a]`` (second index) for every axis."""
    out = values
    for axis, matrix in enumerate(matrices):
        out = np.moveaxis(np.tensordot(matrix, out, axes=(1, axis)), 0, axis)
    return out


def evaluate_tensor_grid(coefficients: np.ndarray, factors: Sequence[KnotVector], axes_points) -> np.ndarray:
    """Values of a tensor-product spline on the grid spanned by per-axis point arrays."""
    return apply_tensor_product(
        [basis_matrix(kv, pts) for kv, pts in zip(factors, axes_points)], coefficients
    )


def evaluate_tensor_points(coefficients: np.ndarray, factors: Sequence[KnotVector], coords) -> np.ndarray:
    """Values at scattered points; ``coords`` are broadcast against each other."""
    coords = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in coords])
    shape = coords[0].shape
    active = [basis_values(kv, c.ravel()) for kv, c in zip(factors, coords)]
    result = np.zeros(coords[0].size)
    for offsets in itertools.product(*[range(kv.degree + 1) for kv in factors]):
        weight = np.ones(result.size)
        index = []
        for (spans, values), kv, r in zip(active, factors, offsets):
            weight = weight * values[:, r]
            index.append(spans - kv.degree + r)
        result += weight * coefficients[tuple(index)]
    return result.reshape(shape)


def grid_axes(coords) -> Optional[List[np.ndarray]]:
    """Per-axis point arrays if ``coords`` form an open (sparse) meshgrid, else None."""
    coords = [np.asarray(c, dtype=float) for c in coords]
    d = len(coords)
    axes = []
    for a, c in enumerate(coords):
        if c.ndim != d or any(c.shape[b] != 1 for b in range(d) if b != a):
            return None
        axes.append(c.ravel())
    return axes


def evaluate_tensor(coefficients: np.ndarray, factors: Sequence[KnotVector], *coords) -> np.ndarray:
    axes = grid_axes(coords) if len(coords) > 1 else None
    if axes is not None:
        return evaluate_tensor_grid(coefficients, factors, axes)
    return evaluate_tensor_points(coefficients, factors, coords)
