"""Quasi-interpolation onto univariate spline spaces.

The dual functional of basis function ``b_i`` is the ``i``-th coefficient of
a local L2 projection. Its region is the support extension of the most central
element of ``supp b_i`` restricted to ``supp b_i``; the Gram matrix is integrated
over that region and spans every B-spline not vanishing on it. The extension
of any element of the support covers the whole support, so the region is
``supp b_i`` itself and the functionals of the reflected knot vector are the
reflected functionals.

Every projector is stored as a :class:`SampledProjector`: sample nodes plus a
matrix taking the samples to coefficients. Tensor-product interpolants are then
contractions of these matrices with sampled function values.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import scipy.linalg

from config import settings
from splinecomplex.bspline import (
    Spline1D,
    SplineSpace1D,
    antiderivative_sampler,
    basis_values,
    derivative_matrix,
)
from splinecomplex.errors import KnotVectorError, SpaceMismatchError
from splinecomplex.knots import Element, KnotVector
from splinecomplex.quadrature import gauss_rule, integrate

logger = logging.getLogger(__name__)

PROJECTOR_KINDS = ("tilde", "plain")


@dataclass(frozen=True)
class SampledProjector:
    """Linear map ``samples at nodes -> spline coefficients``."""
    space: SplineSpace1D
    nodes: np.ndarray
    matrix: np.ndarray

    def coefficients(self, f: Callable) -> np.ndarray:
        values = np.asarray(f(self.nodes), dtype=float) * np.ones_like(self.nodes)
        return self.matrix @ values

    def __call__(self, f: Callable) -> Spline1D:
        return Spline1D(self.space, self.coefficients(f))


@dataclass(frozen=True)
class DualFunctionalSet:
    space: SplineSpace1D
    quadrature_order: int
    supports: Tuple[Tuple[float, float], ...]
    central: Tuple[Element, ...]
    regions: Tuple[Tuple[float, float], ...]
    nodes: np.ndarray
    matrix: np.ndarray

    @property
    def knots(self) -> KnotVector:
        return self.space.knots


def most_central_element(kv: KnotVector, i: int) -> Element:
    """Middle element of ``supp b_i``; the left one of the middle pair on ties."""
    p = kv.degree
    by_span = {el.knot_index: el for el in kv.elements}
    candidates = [by_span[j] for j in range(i, i + p + 1) if j in by_span]
    return candidates[(len(candidates) - 1) // 2]


def projection_region(kv: KnotVector, i: int) -> Tuple[float, float]:
    """Support extension of the most central element, restricted to ``supp b_i``."""
    lo, hi = kv.support(i)
    a, b = kv.support_extension(most_central_element(kv, i))
    return max(a, lo), min(b, hi)


@lru_cache(maxsize=256)
def _assemble(kv: KnotVector, order: int) -> DualFunctionalSet:
    p, k = kv.degree, kv.dimension
    rule = gauss_rule(order)
    elements = kv.elements

    column = {el.knot_index: n * order for n, el in enumerate(elements)}
    nodes = np.empty(len(elements) * order)
    samples: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    for el in elements:
        x, w = rule.on_interval(el.left, el.right)
        nodes[column[el.knot_index]:column[el.knot_index] + order] = x
        _, values = basis_values(kv, x)
        samples[el.knot_index] = (values, w)

    matrix = np.zeros((k, nodes.size))
    regions = []
    for i in range(k):
        a, b = projection_region(kv, i)
        region = [el for el in elements if el.left >= a and el.right <= b]
        # every B-spline not vanishing on the region, in index order
        first = region[0].knot_index - p
        size = region[-1].knot_index + 1 - first
        gram = np.zeros((size, size))
        for el in region:
            values, w = samples[el.knot_index]
            s = el.knot_index - p - first
            gram[s:s + p + 1, s:s + p + 1] += values.T @ (w[:, None] * values)
        unit = np.zeros(size)
        unit[i - first] = 1.0
        y = scipy.linalg.solve(gram, unit, assume_a="pos")
        for el in region:
            values, w = samples[el.knot_index]
            s = el.knot_index - p - first
            start = column[el.knot_index]
            matrix[i, start:start + order] = (values @ y[s:s + p + 1]) * w
        regions.append((a, b))

    nodes.setflags(write=False)
    matrix.setflags(write=False)
    return DualFunctionalSet(
        space=SplineSpace1D(knots=kv),
        quadrature_order=order,
        supports=tuple(kv.support(i) for i in range(k)),
        central=tuple(most_central_element(kv, i) for i in range(k)),
        regions=tuple(regions),
        nodes=nodes,
        matrix=matrix,
    )


def dual_functionals(space, quadrature_order: Optional[int] = None) -> DualFunctionalSet:
    kv = space.knots if isinstance(space, SplineSpace1D) else space
    order = kv.degree + 2 if quadrature_order is None else quadrature_order
    if order < kv.degree + 1:
        raise KnotVectorError(f"quadrature order {order} cannot resolve degree {kv.degree} products")
    return _assemble(kv, order)


def dual_value(duals: DualFunctionalSet, i: int, f: Callable) -> float:
    """``lambda_i(f)``; reads ``f`` only inside the support of ``b_i``."""
    if not 0 <= i < duals.space.dimension:
        raise SpaceMismatchError(f"dual index {i} out of range 0..{duals.space.dimension - 1}")
    row = duals.matrix[i]
    cols = np.nonzero(row)[0]
    values = np.asarray(f(duals.nodes[cols]), dtype=float) * np.ones(cols.size)
    return float(row[cols] @ values)


@lru_cache(maxsize=256)
def _projector(kv: KnotVector, kind: str) -> SampledProjector:
    duals = dual_functionals(kv)
    space = duals.space
    if kind == "plain":
        return SampledProjector(space, duals.nodes, duals.matrix)
    if kind != "tilde":
        raise SpaceMismatchError(f"unknown projector kind {kind!r}, expected one of {PROJECTOR_KINDS}")
    if kv.degree == 0:
        raise KnotVectorError("endpoint interpolation needs a continuous space (degree >= 1)")
    k = kv.dimension
    nodes = np.concatenate([[0.0], duals.nodes, [1.0]])
    matrix = np.zeros((k, nodes.size))
    matrix[:, 1:-1] = duals.matrix
    matrix[0] = 0.0
    matrix[k - 1] = 0.0
    matrix[0, 0] = 1.0
    matrix[k - 1, -1] = 1.0
    return SampledProjector(space, nodes, matrix)


def projector(kv: KnotVector, kind: str = "tilde") -> SampledProjector:
    """Pi (``kind="plain"``) or the endpoint interpolating Pi-tilde as a sampled map."""
    return _projector(kv, kind)


@lru_cache(maxsize=256)
def _derivative_projector(kv: KnotVector, kind: str, n_points: int) -> SampledProjector:
    base = _projector(kv, kind)
    nodes, integral = antiderivative_sampler(kv.breakpoints, base.nodes, n_points)
    matrix = derivative_matrix(kv) @ base.matrix @ integral
    return SampledProjector(SplineSpace1D(knots=kv.truncate()), nodes, matrix)


def derivative_projector(kv: KnotVector, kind: str = "tilde") -> SampledProjector:
    """``f -> d/dx P(int_0^x f)`` onto the truncated space, P being Pi or Pi-tilde."""
    if kv.degree == 0:
        raise KnotVectorError("the derivative projector needs degree >= 1")
    n_points = max(kv.degree + 2, settings.ANTIDERIVATIVE_POINTS)
    return _derivative_projector(kv, kind, n_points)


def pi(duals: DualFunctionalSet, f: Callable) -> Spline1D:
    return projector(duals.knots, "plain")(f)


def pi_tilde(duals: DualFunctionalSet, f: Callable) -> Spline1D:
    return projector(duals.knots, "tilde")(f)


def pi_tilde_partial(duals: DualFunctionalSet, f: Callable) -> Spline1D:
    return derivative_projector(duals.knots, "tilde")(f)


def pi_partial(duals: DualFunctionalSet, f: Callable) -> Spline1D:
    return derivative_projector(duals.knots, "plain")(f)


def _l2_norm(f: Callable, a: float, b: float, breakpoints, n: int) -> float:
    return np.sqrt(integrate(lambda x: np.asarray(f(x), dtype=float) ** 2, a, b, gauss_rule(n), breakpoints))


def stability_ratio(duals: DualFunctionalSet, f: Callable, df: Optional[Callable] = None) -> float:
    """Largest elementwise ratio ``|P f|_{L2(Q)} / (|f|_{L2(Q~)} + h_Q |f'|_{L2(Q~)})``.

    With ``df`` omitted the denominator is ``|f|_{L2(Q~)}``; this measures the
    derivative projector, whose bound involves no derivative of ``f``.
    """
    kv = duals.knots
    approx = pi_tilde(duals, f) if df is not None else pi_tilde_partial(duals, f)
    n = kv.degree + 4
    breakpoints = kv.breakpoints
    worst = 0.0
    for el in kv.elements:
        a, b = kv.support_extension(el)
        num = _l2_norm(approx, el.left, el.right, None, n)
        den = _l2_norm(f, a, b, breakpoints, n)
        if df is not None:
            den += el.length * _l2_norm(df, a, b, breakpoints, n)
        if den > 0:
            worst = max(worst, num / den)
    logger.debug("stability ratio on %s: %.4g", kv, worst)
    return worst
