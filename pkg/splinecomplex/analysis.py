"""Error norms and L2-orthogonal projection.

Integrals are taken on the parametric domain with the weight that makes
them equal to the physical integrals of the pushed-forward fields:

* scalars in role 0: ``|e|^2 m``
* top-role densities: ``|e|^2 / m``
* curl conforming vectors (3D role 1, gradients): ``e^T G^{-1} e m``
* divergence conforming vectors (2D role 1, 3D role 2, 3D curls): ``e^T G e / m``

where ``m`` is the surface measure or the Jacobian determinant and ``G`` the
first fundamental form. Quadrature uses ``max degree + 2`` Gauss points per
element and axis.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from schemas.report_schema import ErrorReport
from splinecomplex.bspline import basis_matrix
from splinecomplex.complex import (
    CoefficientField,
    ComplexSpace,
    component_functions,
    differential,
    grad_2d,
    grad_3d,
    sample_on_grid,
)
from splinecomplex.errors import SingularGramError, SpaceMismatchError
from splinecomplex.geometry import PatchMap, first_fundamental_form, inverse_matrices, measure
from splinecomplex.multipatch import GlobalField, GlobalSpace
from splinecomplex.quadrature import QuadratureRule, gauss_rule  # noqa: F401  (public re-export)
from splinecomplex.solutions import ReferenceFunction

logger = logging.getLogger(__name__)

NORMS = {
    (2, 0): ("L2", "H1semi", "H1"),
    (2, 1): ("L2", "Hdiv"),
    (2, 2): ("L2",),
    (3, 0): ("L2", "H1semi", "H1"),
    (3, 1): ("L2", "Hcurl"),
    (3, 2): ("L2", "Hdiv"),
    (3, 3): ("L2",),
}


def applicable_norms(dim: int, role: int):
    return NORMS[(dim, role)]


def _weight_kind(dim: int, role: int) -> str:
    if role == 0:
        return "measure"
    if role == dim:
        return "density"
    if dim == 3 and role == 1:
        return "covariant"
    return "contravariant"


@dataclass
class _Quadrature:
    axes: List[np.ndarray]
    weights: List[np.ndarray]
    grid: List[np.ndarray]
    m: np.ndarray
    G: np.ndarray
    Ginv: np.ndarray


def _quadrature(space: ComplexSpace, patch: Optional[PatchMap]) -> _Quadrature:
    n = max(space.degrees) + 2
    rule = gauss_rule(n)
    axes, weights = zip(*(rule.composite(kv.breakpoints) for kv in space.primal))
    grid = np.meshgrid(*axes, indexing="ij", sparse=True)
    d = space.dim
    if patch is None:
        eye = np.eye(d).reshape((d, d) + (1,) * d)
        return _Quadrature(list(axes), list(weights), grid, np.ones((1,) * d), eye, eye)
    if patch.dim != d:
        raise SpaceMismatchError(f"a {d}D space cannot live on a {patch.dim}D patch")
    G = first_fundamental_form(patch, *grid)
    Ginv = inverse_matrices(G)
    return _Quadrature(list(axes), list(weights), grid, measure(patch, *grid), G, Ginv)


def _weight_matrix(kind: str, q: _Quadrature, n_components: int):
    if kind == "measure":
        return [[q.m]]
    if kind == "density":
        return [[1.0 / q.m]]
    if kind == "covariant":
        return [[q.Ginv[a, b] * q.m for b in range(n_components)] for a in range(n_components)]
    return [[q.G[a, b] / q.m for b in range(n_components)] for a in range(n_components)]


def _density(kind: str, e: Sequence[np.ndarray], q: _Quadrature) -> np.ndarray:
    M = _weight_matrix(kind, q, len(e))
    return sum(e[a] * M[a][b] * e[b] for a in range(len(e)) for b in range(len(e)))


def _integrate(values: np.ndarray, weights: Sequence[np.ndarray]) -> float:
    shape = tuple(w.size for w in weights)
    out = np.broadcast_to(values, shape)
    for w in weights:
        out = np.tensordot(w, out, axes=(0, 0))
    return float(out)


def _sampled(f: Callable, n_components: int, axes) -> List[np.ndarray]:
    return [sample_on_grid(g, axes) for g in component_functions(f, n_components)]


def _as_reference(exact, role: int, n_components: int) -> ReferenceFunction:
    if isinstance(exact, ReferenceFunction):
        return exact
    return ReferenceFunction(role, n_components, exact)


def _patch_error_squares(
    field: CoefficientField, exact: ReferenceFunction, norms: Sequence[str], patch: Optional[PatchMap]
) -> Dict[str, float]:
    space = field.space
    dim, role = space.dim, space.role
    q = _quadrature(space, patch)
    parts: Dict[str, float] = {}

    need_l2 = any(n in ("L2", "H1", "Hdiv", "Hcurl") for n in norms)
    if need_l2:
        disc = field.evaluate_grid(q.axes)
        ref = _sampled(exact.values, space.n_components, q.axes)
        e = [disc[c] - ref[c] for c in range(space.n_components)]
        parts["L2"] = _integrate(_density(_weight_kind(dim, role), e, q), q.weights)

    if any(n in ("H1semi", "H1") for n in norms):
        if exact.gradient is None:
            raise SpaceMismatchError("the exact solution carries no gradient")
        grad = grad_2d(field) if dim == 2 else grad_3d(field)
        disc = grad.evaluate_grid(q.axes)
        ref = _sampled(exact.gradient, dim, q.axes)
        e = [disc[a] - ref[a] for a in range(dim)]
        parts["H1semi"] = _integrate(_density("covariant", e, q), q.weights)

    if any(n in ("Hdiv", "Hcurl") for n in norms):
        if exact.derivative is None:
            raise SpaceMismatchError("the exact solution carries no derivative")
        image = differential(field)
        disc = image.evaluate_grid(q.axes)
        ref = _sampled(exact.derivative, image.space.n_components, q.axes)
        e = [disc[c] - ref[c] for c in range(image.space.n_components)]
        parts["D"] = _integrate(_density(_weight_kind(dim, role + 1), e, q), q.weights)
    return parts


def _combine(parts: Dict[str, float], norm: str) -> float:
    if norm == "L2":
        return parts["L2"]
    if norm == "H1semi":
        return parts["H1semi"]
    if norm == "H1":
        return parts["L2"] + parts["H1semi"]
    return parts["L2"] + parts["D"]


def error_norms(
    field: Union[CoefficientField, GlobalField],
    exact,
    norms: Sequence[str],
    geometry=None,
) -> Dict[str, float]:
    """Several norms of ``field - exact`` from one pass over the quadrature grid.

    ``exact`` is a ReferenceFunction or a plain callable of the reference
    coordinates (values only); for a GlobalField it is one such object per
    patch. ``geometry`` is the patch (or None for the bare parameter domain)
    of a CoefficientField; GlobalFields use their own geometry.
    """
    if isinstance(field, GlobalField):
        spaces = field.space.local_spaces
        fields = field.patch_fields()
        patches = field.space.geometry.patches
        exacts = list(exact) if isinstance(exact, (list, tuple)) else [exact] * len(fields)
        if len(exacts) != len(fields):
            raise SpaceMismatchError(f"need one exact function per patch ({len(fields)})")
    else:
        spaces, fields, patches, exacts = [field.space], [field], [geometry], [exact]

    dim, role = spaces[0].dim, spaces[0].role
    for norm in norms:
        if norm not in NORMS[(dim, role)]:
            raise SpaceMismatchError(f"norm {norm} does not apply to {dim}D role {role}")

    totals = {norm: 0.0 for norm in norms}
    for f, ex, patch in zip(fields, exacts, patches):
        parts = _patch_error_squares(f, _as_reference(ex, role, f.space.n_components), norms, patch)
        for norm in norms:
            totals[norm] += _combine(parts, norm)
    return {norm: float(np.sqrt(max(v, 0.0))) for norm, v in totals.items()}


def error_norm(field, exact, norm: str, geometry=None) -> float:
    return error_norms(field, exact, [norm], geometry)[norm]


def error_report(field, exact, norms: Sequence[str], geometry=None) -> ErrorReport:
    role = field.space.role
    return ErrorReport(role=role, errors=error_norms(field, exact, norms, geometry))


def _patch_system(space: ComplexSpace, f, patch: Optional[PatchMap]):
    q = _quadrature(space, patch)
    kind = _weight_kind(space.dim, space.role)
    M = _weight_matrix(kind, q, space.n_components)
    shape = tuple(a.size for a in q.axes)
    w = q.weights[0]
    for extra in q.weights[1:]:
        w = np.multiply.outer(w, extra)
    w = w.ravel()

    bases = []
    for factors in space.factors:
        B = np.ones((1, 1))
        for kv, pts in zip(factors, q.axes):
            B = np.kron(B, basis_matrix(kv, pts))
        bases.append(B)

    values = [v.ravel() for v in _sampled(f, space.n_components, q.axes)]
    n = space.n_components
    weights = [[np.broadcast_to(M[a][b], shape).ravel() * w for b in range(n)] for a in range(n)]
    gram = np.block([
        [bases[a].T @ (weights[a][b][:, None] * bases[b]) for b in range(n)] for a in range(n)
    ])
    rhs = np.concatenate([
        sum(bases[a].T @ (weights[a][b] * values[b]) for b in range(n)) for a in range(n)
    ])
    return gram, rhs


def l2_system(space: Union[ComplexSpace, GlobalSpace], f, geometry=None):
    """Gram matrix and right-hand side of the L2-orthogonal projection onto ``space``."""
    if isinstance(space, ComplexSpace):
        return _patch_system(space, f, geometry)
    functions = list(f) if isinstance(f, (list, tuple)) else [f] * space.n_patches
    P = space.local_to_global().toarray()
    gram = np.zeros((space.dimension, space.dimension))
    rhs = np.zeros(space.dimension)
    for j, (local, func, patch) in enumerate(zip(space.local_spaces, functions, space.geometry.patches)):
        A, b = _patch_system(local, func, patch)
        Pj = P[space.offsets[j]:space.offsets[j + 1]]
        gram += Pj.T @ A @ Pj
        rhs += Pj.T @ b
    return gram, rhs


def l2_project(space: Union[ComplexSpace, GlobalSpace], f, geometry=None):
    gram, rhs = l2_system(space, f, geometry)
    try:
        factor = scipy.linalg.cho_factor(gram)
    except scipy.linalg.LinAlgError as exc:
        raise SingularGramError(f"Gram matrix of dimension {gram.shape[0]} is not positive definite") from exc
    pivots = np.abs(np.diag(factor[0]))
    if pivots.min() < 1e-8 * pivots.max():
        logger.warning("Gram matrix is badly conditioned (pivot ratio %.2g)", pivots.min() / pivots.max())
    coefficients = scipy.linalg.cho_solve(factor, rhs)
    if isinstance(space, ComplexSpace):
        return CoefficientField.from_flat(space, coefficients)
    return GlobalField(space, coefficients)
