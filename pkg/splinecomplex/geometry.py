"""Patch parametrisations and the role-dependent pull-backs and push-forwards.

Physical functions are callables of ``(x, y, z)``; reference functions are
callables of the parametric coordinates. Vector valued callables return a
sequence of component arrays. Every evaluation accepts broadcastable arrays,
so open meshgrids stay cheap: ``evaluate`` returns three broadcastable arrays
and ``jacobian`` a ``(3, d, ...)`` array that broadcasts the same way.
"""
import logging
from abc import ABC, abstractmethod
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from config import settings
from splinecomplex.bspline import differentiate_along, evaluate_tensor
from splinecomplex.errors import GeometryError
from splinecomplex.knots import KnotVector

logger = logging.getLogger(__name__)


class PatchMap(ABC):
    dim: int
    name: str = "patch"

    @abstractmethod
    def evaluate(self, *coords) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        ...

    @abstractmethod
    def jacobian(self, *coords) -> np.ndarray:
        ...

    def __call__(self, *coords):
        return self.evaluate(*coords)

    def validation_points(self) -> List[np.ndarray]:
        n = settings.VALIDATION_SAMPLES
        axes = [np.linspace(0.0, 1.0, n)] * self.dim
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def validate(self):
        """Check non-degeneracy on a sample grid that includes the corners."""
        coords = self.validation_points()
        if self.dim == 2:
            surface_measure(self, *coords)
        else:
            jacobian_determinant(self, *coords)
        return self

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} d={self.dim}>"


class AffinePatch(PatchMap):
    """``F(x) = origin + axes @ x`` with ``axes`` of shape ``(3, d)``."""

    def __init__(self, origin: Sequence[float], axes, name: str = "affine"):
        self.origin = np.asarray(origin, dtype=float)
        self.axes = np.asarray(axes, dtype=float)
        if self.origin.shape != (3,) or self.axes.ndim != 2 or self.axes.shape[0] != 3:
            raise GeometryError("affine patch needs a 3-vector origin and a 3 x d axes matrix")
        self.dim = self.axes.shape[1]
        self.name = name
        self.validate()

    def evaluate(self, *coords):
        out = []
        for i in range(3):
            value = self.origin[i]
            for a, x in enumerate(coords):
                if self.axes[i, a] != 0.0:
                    value = value + self.axes[i, a] * np.asarray(x, dtype=float)
            out.append(np.asarray(value, dtype=float))
        return tuple(np.broadcast_arrays(*out))

    def jacobian(self, *coords):
        shape = np.broadcast_shapes(*(np.shape(x) for x in coords))
        axes = self.axes.reshape((3, self.dim) + (1,) * len(shape))
        return np.broadcast_to(axes, (3, self.dim) + shape)


class AnalyticPatch(PatchMap):
    """Closed-form map with a closed-form Jacobian."""

    def __init__(self, dim: int, mapping: Callable, jacobian: Callable, name: str = "analytic"):
        self.dim = dim
        self._mapping = mapping
        self._jacobian = jacobian
        self.name = name
        self.validate()

    def evaluate(self, *coords):
        return tuple(np.asarray(v, dtype=float) for v in self._mapping(*coords))

    def jacobian(self, *coords):
        rows = self._jacobian(*coords)
        parts = [np.asarray(rows[i][a], dtype=float) for i in range(3) for a in range(self.dim)]
        parts = np.broadcast_arrays(*parts)
        return np.stack(parts).reshape((3, self.dim) + parts[0].shape)


class NurbsPatch(PatchMap):
    """Rational tensor-product map from control points ``(*k, 3)`` and weights ``(*k)``."""

    def __init__(self, knots: Sequence[KnotVector], control_points, weights, name: str = "nurbs"):
        self.knots = tuple(knots)
        self.dim = len(self.knots)
        self.control_points = np.asarray(control_points, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.name = name
        shape = tuple(kv.dimension for kv in self.knots)
        if self.control_points.shape != shape + (3,) or self.weights.shape != shape:
            raise GeometryError(f"control net must have shape {shape + (3,)} and weights {shape}")
        if np.any(self.weights <= 0):
            raise GeometryError("NURBS weights must be strictly positive")
        for kv in self.knots:
            interior = kv.array[kv.degree + 1:-(kv.degree + 1)]
            if interior.size != np.unique(interior).size:
                raise GeometryError("geometry maps with repeated interior knots are not supported")
        self._numerator = [self.weights * self.control_points[..., i] for i in range(3)]
        self.validate()

    def _tensor(self, coefficients, axis_derivative: Optional[int], coords):
        factors = list(self.knots)
        if axis_derivative is not None:
            coefficients = differentiate_along(coefficients, factors[axis_derivative], axis_derivative)
            factors[axis_derivative] = factors[axis_derivative].truncate()
        return evaluate_tensor(coefficients, factors, *coords)

    def evaluate(self, *coords):
        w = self._tensor(self.weights, None, coords)
        return tuple(self._tensor(n, None, coords) / w for n in self._numerator)

    def jacobian(self, *coords):
        w = self._tensor(self.weights, None, coords)
        num = [self._tensor(n, None, coords) for n in self._numerator]
        rows = []
        for i in range(3):
            row = []
            for a in range(self.dim):
                dw = self._tensor(self.weights, a, coords)
                dn = self._tensor(self._numerator[i], a, coords)
                row.append((dn * w - num[i] * dw) / (w * w))
            rows.append(np.broadcast_arrays(*row))
        return np.array(rows)


def _matrix_last(A):
    return np.moveaxis(A, (0, 1), (-2, -1))


def first_fundamental_form(F: PatchMap, *coords) -> np.ndarray:
    """``G = dF^T dF``, shape ``(d, d, ...)``."""
    J = F.jacobian(*coords)
    return np.einsum("ia...,ib...->ab...", J, J)


def surface_measure(F: PatchMap, *coords) -> np.ndarray:
    """``kappa = |d_1 F x d_2 F|``."""
    if F.dim != 2:
        raise GeometryError("surface measure is defined for 2D patches only")
    J = F.jacobian(*coords)
    kappa = np.linalg.norm(np.cross(J[:, 0], J[:, 1], axis=0), axis=0)
    if np.min(kappa) < settings.MEASURE_FLOOR:
        raise GeometryError(f"degenerate parametrisation of {F.name}: surface measure {np.min(kappa):.3g}")
    return kappa


def jacobian_determinant(F: PatchMap, *coords) -> np.ndarray:
    if F.dim != 3:
        raise GeometryError("the Jacobian determinant is defined for 3D patches only")
    det = np.linalg.det(_matrix_last(F.jacobian(*coords)))
    if np.min(det) <= settings.MEASURE_FLOOR:
        raise GeometryError(f"non-positive Jacobian determinant on {F.name}: {np.min(det):.3g}")
    return det


def measure(F: PatchMap, *coords) -> np.ndarray:
    return surface_measure(F, *coords) if F.dim == 2 else jacobian_determinant(F, *coords)


def inverse_matrices(A) -> np.ndarray:
    """Inverse of a stack of square matrices laid out as ``(n, n, ...)``."""
    A = np.asarray(A, dtype=float)
    return np.moveaxis(np.linalg.inv(_matrix_last(A)), (-2, -1), (0, 1))


def _matvec(M, v):
    return np.einsum("ij...,j...->i...", M, v)


def _transpose_matvec(M, v):
    return np.einsum("ji...,j...->i...", M, v)


def _vector(values, n: int) -> np.ndarray:
    if len(values) != n:
        raise GeometryError(f"expected a {n}-component field, got {len(values)}")
    return np.stack(np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in values)))


def pullback_surface(k: int, F: PatchMap, f: Callable) -> Callable:
    """Reference representation of a physical role-``k`` function on a surface patch.

    Role 1 uses ``kappa G^{-1} dF^T g``, the tangential part of ``g`` expressed
    through the pseudo-inverse of ``dF``.
    """
    if F.dim != 2 or k not in (0, 1, 2):
        raise GeometryError(f"surface pull-backs exist for roles 0, 1, 2 on 2D patches, got role {k}")

    def pulled(*x):
        X = F.evaluate(*x)
        if k == 0:
            return np.asarray(f(*X), dtype=float)
        kappa = surface_measure(F, *x)
        if k == 2:
            return kappa * np.asarray(f(*X), dtype=float)
        J = F.jacobian(*x)
        g = _vector(f(*X), 3)
        t = _transpose_matvec(J, g)
        return kappa * _matvec(inverse_matrices(first_fundamental_form(F, *x)), t)

    return pulled


def pushforward_surface(k: int, F: PatchMap, fhat: Callable) -> Callable:
    """Physical values of a reference function, as a function of parametric points."""
    if F.dim != 2 or k not in (0, 1, 2):
        raise GeometryError(f"surface push-forwards exist for roles 0, 1, 2 on 2D patches, got role {k}")

    def pushed(*x):
        if k == 0:
            return np.asarray(fhat(*x), dtype=float)
        kappa = surface_measure(F, *x)
        if k == 2:
            return np.asarray(fhat(*x), dtype=float) / kappa
        J = F.jacobian(*x)
        return _matvec(J, _vector(fhat(*x), 2)) / kappa

    return pushed


def pullback_volume(k: int, F: PatchMap, f: Callable) -> Callable:
    """Gradient, curl and divergence conforming transforms on a volume patch."""
    if F.dim != 3 or k not in (0, 1, 2, 3):
        raise GeometryError(f"volume pull-backs exist for roles 0..3 on 3D patches, got role {k}")

    def pulled(*x):
        X = F.evaluate(*x)
        if k == 0:
            return np.asarray(f(*X), dtype=float)
        det = jacobian_determinant(F, *x)
        if k == 3:
            return det * np.asarray(f(*X), dtype=float)
        J = F.jacobian(*x)
        g = _vector(f(*X), 3)
        if k == 1:
            return _transpose_matvec(J, g)
        return det * _matvec(inverse_matrices(J), g)

    return pulled


def pushforward_volume(k: int, F: PatchMap, fhat: Callable) -> Callable:
    if F.dim != 3 or k not in (0, 1, 2, 3):
        raise GeometryError(f"volume push-forwards exist for roles 0..3 on 3D patches, got role {k}")

    def pushed(*x):
        if k == 0:
            return np.asarray(fhat(*x), dtype=float)
        det = jacobian_determinant(F, *x)
        if k == 3:
            return np.asarray(fhat(*x), dtype=float) / det
        J = F.jacobian(*x)
        g = _vector(fhat(*x), 3)
        if k == 1:
            return _transpose_matvec(inverse_matrices(J), g)
        return _matvec(J, g) / det

    return pushed


def pullback(k: int, F: PatchMap, f: Callable) -> Callable:
    return pullback_surface(k, F, f) if F.dim == 2 else pullback_volume(k, F, f)


def pushforward(k: int, F: PatchMap, fhat: Callable) -> Callable:
    return pushforward_surface(k, F, fhat) if F.dim == 2 else pushforward_volume(k, F, fhat)
