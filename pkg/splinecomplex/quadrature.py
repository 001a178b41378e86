"""Gauss-Legendre rules on [0, 1] and their composite versions."""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

from splinecomplex.errors import SplineComplexError

logger = logging.getLogger(__name__)

MAX_GAUSS_POINTS = 32


@dataclass(frozen=True)
class QuadratureRule:
    """Points and positive weights on [0, 1]; the weights sum to 1."""
    points: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self) -> int:
        return self.points.size

    def on_interval(self, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
        return a + (b - a) * self.points, (b - a) * self.weights

    def composite(self, breakpoints: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """Rule repeated on every interval between consecutive breakpoints."""
        b = np.asarray(breakpoints, dtype=float)
        h = np.diff(b)
        points = (b[:-1, None] + h[:, None] * self.points[None, :]).ravel()
        weights = (h[:, None] * self.weights[None, :]).ravel()
        return points, weights


@lru_cache(maxsize=None)
def gauss_rule(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [0, 1], exact up to degree 2n - 1."""
    if not 1 <= n <= MAX_GAUSS_POINTS:
        raise SplineComplexError(f"Gauss rule needs 1 <= n <= {MAX_GAUSS_POINTS}, got {n}")
    nodes, weights = np.polynomial.legendre.leggauss(n)
    rule = QuadratureRule(points=0.5 * (nodes + 1.0), weights=0.5 * weights)

    moment = float(np.dot(rule.weights, rule.points ** (2 * n - 1)))
    if abs(moment - 1.0 / (2 * n)) > 1e-14 or abs(rule.weights.sum() - 1.0) > 1e-14:
        raise SplineComplexError(f"{n}-point Gauss rule failed its exactness check")
    rule.points.setflags(write=False)
    rule.weights.setflags(write=False)
    return rule


def integrate(f, a: float, b: float, rule: QuadratureRule, breakpoints=None) -> float:
    """Composite quadrature of a vectorised callable over [a, b]."""
    if breakpoints is None:
        cuts = np.array([a, b], dtype=float)
    else:
        inner = np.asarray(breakpoints, dtype=float)
        cuts = np.unique(np.concatenate([[a, b], inner[(inner > a) & (inner < b)]]))
    x, w = rule.composite(cuts)
    return float(np.dot(w, np.asarray(f(x), dtype=float) * np.ones_like(x)))
