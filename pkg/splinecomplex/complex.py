"""Tensor-product spline complexes on [0,1]^2 and [0,1]^3.

A role-k space is a list of vector components, each a tensor product of
univariate spaces. Along every axis a component uses either the primal knot
vector or its truncation. Coefficients are stored per component as
C-ordered arrays (last parametric axis fastest).

The 2D role-1 space is divergence conforming: component 0 is truncated along
y and component 1 along x. ``rotate`` turns it into the curl conforming
layout used by ``grad_2d``.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from splinecomplex import bspline
from splinecomplex.bspline import apply_tensor_product, evaluate_tensor, evaluate_tensor_grid
from splinecomplex.errors import KnotVectorError, SpaceMismatchError
from splinecomplex.knots import KnotVector
from splinecomplex.quasi_interp import derivative_projector, projector

logger = logging.getLogger(__name__)

F, T = False, True

# True marks an axis along which the component uses the truncated knot vector
LAYOUTS = {
    2: (
        ((F, F),),
        ((F, T), (T, F)),
        ((T, T),),
    ),
    3: (
        ((F, F, F),),
        ((T, F, F), (F, T, F), (F, F, T)),
        ((F, T, T), (T, F, T), (T, T, F)),
        ((T, T, T),),
    ),
}
CURL_LAYOUT_2D = ((T, F), (F, T))


class ComplexSpace(BaseModel):
    dim: int
    role: int
    primal: Tuple[KnotVector, ...]
    curl_conforming: bool = False

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_role(self):
        if self.dim not in LAYOUTS:
            raise SpaceMismatchError(f"only 2D and 3D complexes exist, got dim={self.dim}")
        if not 0 <= self.role <= self.dim:
            raise SpaceMismatchError(f"role {self.role} out of range 0..{self.dim}")
        if len(self.primal) != self.dim:
            raise SpaceMismatchError(f"need {self.dim} knot vectors, got {len(self.primal)}")
        if any(kv.degree < 1 for kv in self.primal):
            raise KnotVectorError("every degree of a spline complex must be >= 1")
        if self.curl_conforming and (self.dim, self.role) != (2, 1):
            raise SpaceMismatchError("only the 2D role-1 space has a curl conforming variant")
        return self

    @property
    def layout(self) -> Tuple[Tuple[bool, ...], ...]:
        if self.curl_conforming:
            return CURL_LAYOUT_2D
        return LAYOUTS[self.dim][self.role]

    @property
    def n_components(self) -> int:
        return len(self.layout)

    @property
    def factors(self) -> Tuple[Tuple[KnotVector, ...], ...]:
        return _factors(self)

    @property
    def shapes(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(kv.dimension for kv in comp) for comp in self.factors)

    @property
    def component_dimensions(self) -> Tuple[int, ...]:
        return tuple(int(np.prod(s)) for s in self.shapes)

    @property
    def dimension(self) -> int:
        return sum(self.component_dimensions)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(kv.degree for kv in self.primal)

    def with_role(self, role: int) -> "ComplexSpace":
        return ComplexSpace(dim=self.dim, role=role, primal=self.primal)


@lru_cache(maxsize=None)
def _factors(space: ComplexSpace):
    return tuple(
        tuple(kv.truncate() if reduced else kv for kv, reduced in zip(space.primal, comp))
        for comp in space.layout
    )


@dataclass(frozen=True)
class CoefficientField:
    space: ComplexSpace
    components: Tuple[np.ndarray, ...]

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=float) for c in self.components)
        if len(comps) != self.space.n_components:
            raise SpaceMismatchError(
                f"role {self.space.role} needs {self.space.n_components} components, got {len(comps)}"
            )
        for c, shape in zip(comps, self.space.shapes):
            if c.shape != shape:
                raise SpaceMismatchError(f"component shape {c.shape} does not match {shape}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def zeros(cls, space: ComplexSpace) -> "CoefficientField":
        return cls(space, tuple(np.zeros(s) for s in space.shapes))

    @classmethod
    def from_flat(cls, space: ComplexSpace, values: np.ndarray) -> "CoefficientField":
        values = np.asarray(values, dtype=float)
        if values.shape != (space.dimension,):
            raise SpaceMismatchError(f"expected {space.dimension} coefficients, got {values.shape}")
        cuts = np.cumsum(space.component_dimensions)[:-1]
        return cls(space, tuple(v.reshape(s) for v, s in zip(np.split(values, cuts), space.shapes)))

    def flat(self) -> np.ndarray:
        return np.concatenate([c.ravel() for c in self.components])

    def _check_same(self, other: "CoefficientField"):
        if self.space != other.space:
            raise SpaceMismatchError("fields live on different spaces")

    def __add__(self, other: "CoefficientField") -> "CoefficientField":
        self._check_same(other)
        return CoefficientField(self.space, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "CoefficientField") -> "CoefficientField":
        self._check_same(other)
        return CoefficientField(self.space, tuple(a - b for a, b in zip(self.components, other.components)))

    def __mul__(self, scalar: float) -> "CoefficientField":
        return CoefficientField(self.space, tuple(scalar * c for c in self.components))

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(c))) if c.size else 0.0 for c in self.components)

    def __call__(self, *coords) -> np.ndarray:
        """Values at parametric points, stacked as ``(n_components, ...)``.

        Open meshgrids (``np.meshgrid(..., sparse=True)``) take the tensor
        fast path; anything else is broadcast and evaluated pointwise.
        """
        if len(coords) != self.space.dim:
            raise SpaceMismatchError(f"expected {self.space.dim} coordinates, got {len(coords)}")
        return np.stack([
            evaluate_tensor(c, factors, *coords)
            for c, factors in zip(self.components, self.space.factors)
        ])

    def evaluate_grid(self, axes_points: Sequence[np.ndarray]) -> np.ndarray:
        return np.stack([
            evaluate_tensor_grid(c, factors, axes_points)
            for c, factors in zip(self.components, self.space.factors)
        ])


def build_complex(dim: int, degrees: Union[int, Sequence[int]], knots: Sequence) -> List[ComplexSpace]:
    """The spaces of roles ``0..dim`` over the given primal knot vectors.

    ``knots`` holds ``KnotVector`` objects or plain knot sequences; ``degrees``
    may be a single int used on every axis.
    """
    if isinstance(degrees, int):
        degrees = (degrees,) * dim
    if len(degrees) != dim or len(knots) != dim:
        raise SpaceMismatchError(f"a {dim}D complex needs {dim} degrees and {dim} knot vectors")
    primal = []
    for p, kv in zip(degrees, knots):
        if p < 1:
            raise KnotVectorError("every degree of a spline complex must be >= 1")
        if not isinstance(kv, KnotVector):
            kv = KnotVector(degree=p, knots=tuple(kv))
        elif kv.degree != p:
            raise KnotVectorError(f"knot vector carries degree {kv.degree}, expected {p}")
        if not kv.is_locally_quasi_uniform():
            logger.warning("%s is not locally quasi-uniform; error estimates may degrade", kv)
        primal.append(kv)
    return [ComplexSpace(dim=dim, role=k, primal=tuple(primal)) for k in range(dim + 1)]


def _expect(field: CoefficientField, dim: int, role: int, curl_conforming: bool = False):
    s = field.space
    if (s.dim, s.role, s.curl_conforming) != (dim, role, curl_conforming):
        raise SpaceMismatchError(
            f"operator expects a {dim}D role-{role} field, got {s.dim}D role-{s.role}"
        )


def _d(coeffs: np.ndarray, space: ComplexSpace, axis: int) -> np.ndarray:
    return bspline.differentiate_along(coeffs, space.primal[axis], axis)


def curl_2d(f: CoefficientField) -> CoefficientField:
    """``(d_y f, -d_x f)`` on the divergence conforming role-1 space."""
    _expect(f, 2, 0)
    (c,) = f.components
    target = f.space.with_role(1)
    return CoefficientField(target, (_d(c, f.space, 1), -_d(c, f.space, 0)))


def div_2d(f: CoefficientField) -> CoefficientField:
    _expect(f, 2, 1)
    gx, gy = f.components
    return CoefficientField(f.space.with_role(2), (_d(gx, f.space, 0) + _d(gy, f.space, 1),))


def grad_2d(f: CoefficientField) -> CoefficientField:
    """Gradient of a role-0 field on the curl conforming role-1 space."""
    _expect(f, 2, 0)
    (c,) = f.components
    target = ComplexSpace(dim=2, role=1, primal=f.space.primal, curl_conforming=True)
    return CoefficientField(target, (_d(c, f.space, 0), _d(c, f.space, 1)))


def rotate(f: CoefficientField) -> CoefficientField:
    """Quarter turn ``(g0, g1) -> (-g1, g0)`` between the two 2D role-1 layouts."""
    if (f.space.dim, f.space.role) != (2, 1):
        raise SpaceMismatchError("rotation acts on 2D role-1 fields only")
    g0, g1 = f.components
    target = ComplexSpace(dim=2, role=1, primal=f.space.primal, curl_conforming=not f.space.curl_conforming)
    if f.space.curl_conforming:
        return CoefficientField(target, (g1, -g0))
    return CoefficientField(target, (-g1, g0))


def grad_3d(f: CoefficientField) -> CoefficientField:
    _expect(f, 3, 0)
    (c,) = f.components
    return CoefficientField(f.space.with_role(1), tuple(_d(c, f.space, a) for a in range(3)))


def curl_3d(f: CoefficientField) -> CoefficientField:
    _expect(f, 3, 1)
    gx, gy, gz = f.components
    s = f.space
    return CoefficientField(s.with_role(2), (
        _d(gz, s, 1) - _d(gy, s, 2),
        _d(gx, s, 2) - _d(gz, s, 0),
        _d(gy, s, 0) - _d(gx, s, 1),
    ))


def div_3d(f: CoefficientField) -> CoefficientField:
    _expect(f, 3, 2)
    s = f.space
    return CoefficientField(s.with_role(3), (sum(_d(g, s, a) for a, g in enumerate(f.components)),))


def differential(f: CoefficientField) -> CoefficientField:
    """The operator leaving ``f``'s role: curl/div in 2D, grad/curl/div in 3D."""
    s = f.space
    if s.curl_conforming:
        raise SpaceMismatchError("rotate the field back before applying the complex operators")
    operators = {(2, 0): curl_2d, (2, 1): div_2d, (3, 0): grad_3d, (3, 1): curl_3d, (3, 2): div_3d}
    try:
        return operators[(s.dim, s.role)](f)
    except KeyError:
        raise SpaceMismatchError(f"role {s.role} is the last space of the {s.dim}D complex") from None


def component_functions(f, n_components: int) -> List[Callable]:
    """Split ``f`` into one scalar callable per vector component.

    ``f`` is a scalar callable, a sequence of scalar callables, or a callable
    whose result indexes by component (list of arrays or stacked array).
    """
    if isinstance(f, (list, tuple)):
        if len(f) != n_components:
            raise SpaceMismatchError(f"expected {n_components} component functions, got {len(f)}")
        return list(f)
    if n_components == 1 and not isinstance(f, CoefficientField):
        return [f]
    return [lambda *x, c=c: f(*x)[c] for c in range(n_components)]


def sample_on_grid(func: Callable, axes_points: Sequence[np.ndarray]) -> np.ndarray:
    grid = np.meshgrid(*axes_points, indexing="ij", sparse=True)
    shape = tuple(len(p) for p in axes_points)
    return np.broadcast_to(np.asarray(func(*grid), dtype=float), shape)


def interpolate(
    spaces: Union[ComplexSpace, Sequence[ComplexSpace]],
    role: Optional[int],
    f,
    kind: str = "tilde",
) -> CoefficientField:
    """Tensor-product quasi-interpolant of ``f`` onto the role-``role`` space.

    Full axes use the quasi-interpolant, truncated axes the matching
    derivative projector. ``kind`` selects the endpoint interpolating
    (``"tilde"``) or the plain operators.
    """
    if isinstance(spaces, ComplexSpace):
        space = spaces if role is None or role == spaces.role else spaces.with_role(role)
    else:
        if role is None or not 0 <= role < len(spaces):
            raise SpaceMismatchError(f"role {role} out of range 0..{len(spaces) - 1}")
        space = spaces[role]
    components = []
    for func, reduced in zip(component_functions(f, space.n_components), space.layout):
        ops = [
            derivative_projector(kv, kind) if r else projector(kv, kind)
            for kv, r in zip(space.primal, reduced)
        ]
        values = sample_on_grid(func, [op.nodes for op in ops])
        components.append(apply_tensor_product([op.matrix for op in ops], values))
    return CoefficientField(space, tuple(components))


def commuting_residual(spaces, role: int, f, df, kind: str = "tilde") -> float:
    """``max |D(P_k f) - P_{k+1}(D f)|`` over coefficients."""
    if isinstance(spaces, ComplexSpace):
        spaces = [spaces.with_role(k) for k in range(spaces.dim + 1)]
    lhs = differential(interpolate(spaces, role, f, kind))
    rhs = interpolate(spaces, role + 1, df, kind)
    return (lhs - rhs).max_abs()


def random_field(space: ComplexSpace, rng: np.random.Generator, bound: int = 8) -> CoefficientField:
    """Integer-valued coefficients, so the complex operators act exactly on them."""
    return CoefficientField(
        space, tuple(rng.integers(-bound, bound + 1, size=s).astype(float) for s in space.shapes)
    )
