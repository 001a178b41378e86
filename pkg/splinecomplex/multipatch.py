"""Multipatch geometries, interface gluing and globally conforming spaces.

Local degrees of freedom are numbered patch by patch, component by
component, each component in C order. Interface gluing identifies the
boundary coefficients that carry the trace of the role:

* role 0: the scalar values (sign +1),
* divergence conforming roles (2D role 1, 3D role 2): the normal component,
  with sign ``-s_a * s_b`` where ``s`` is -1 on ``min`` sides and +1 on ``max`` sides,
* 3D role 1: the two tangential components (sign +1),
* the top role: nothing.

Identifications are merged with a signed union-find, so a coefficient shared
by several interfaces (cube corners) ends up as one global unknown.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse
from pydantic import BaseModel, ConfigDict

from config import settings
from schemas.geometry_schema import InterfaceDescriptor
from schemas.report_schema import ConformityReport, InterfaceReport
from splinecomplex.complex import CoefficientField, ComplexSpace, build_complex, commuting_residual, interpolate
from splinecomplex.errors import ConformityError, SpaceMismatchError
from splinecomplex.geometry import PatchMap, pullback
from splinecomplex.knots import KnotVector, make_knots, refine
from splinecomplex.solutions import ManufacturedSolution, reference_function

logger = logging.getLogger(__name__)

SIDES = {
    "xmin": (0, 0), "xmax": (0, 1),
    "ymin": (1, 0), "ymax": (1, 1),
    "zmin": (2, 0), "zmax": (2, 1),
}


def side_axis(side: str) -> Tuple[int, int]:
    return SIDES[side]


def side_sign(side: str) -> int:
    return 1 if SIDES[side][1] else -1


def sides_for(dim: int) -> List[str]:
    return [s for s, (axis, _) in SIDES.items() if axis < dim]


def face_axes(dim: int, side: str) -> List[int]:
    axis, _ = SIDES[side]
    return [a for a in range(dim) if a != axis]


def side_coordinates(dim: int, side: str, params: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Parametric coordinates of points on ``side``; ``params`` run along the face axes in order."""
    axis, end = SIDES[side]
    coords = [np.asarray(p, dtype=float) for p in params]
    if len(coords) != dim - 1:
        raise SpaceMismatchError(f"a side of a {dim}D patch needs {dim - 1} parameters")
    coords.insert(axis, np.full(np.broadcast(*coords).shape, float(end)))
    return coords


def _sample_params(dim: int, n: int) -> List[np.ndarray]:
    t = np.concatenate([np.linspace(0.0, 1.0, n), [0.3183098861837907]])
    if dim == 2:
        return [t]
    s, u = np.meshgrid(t, t, indexing="ij")
    return [s.ravel(), u.ravel()]


def _map_params(params: List[np.ndarray], orientation: str) -> List[np.ndarray]:
    return [1.0 - p for p in params] if orientation == "reversed" else params


def _side_deviation(pa: PatchMap, side_a: str, pb: PatchMap, side_b: str, orientation: str, n: int) -> float:
    params = _sample_params(pa.dim, n)
    xa = pa.evaluate(*side_coordinates(pa.dim, side_a, params))
    xb = pb.evaluate(*side_coordinates(pb.dim, side_b, _map_params(params, orientation)))
    return float(max(np.max(np.abs(np.asarray(a) - np.asarray(b))) for a, b in zip(xa, xb)))


def detect_interfaces(patches: Sequence[PatchMap], tol: Optional[float] = None) -> List[InterfaceDescriptor]:
    """All full-side coincidences between distinct patches."""
    tol = settings.GEOMETRY_TOLERANCE if tol is None else tol
    n = settings.VALIDATION_SAMPLES
    dim = patches[0].dim
    orientations = ("same", "reversed") if dim == 2 else ("same",)
    used = set()
    found = []
    for a in range(len(patches)):
        for b in range(a + 1, len(patches)):
            for side_a in sides_for(dim):
                for side_b in sides_for(dim):
                    if (a, side_a) in used or (b, side_b) in used:
                        continue
                    for orientation in orientations:
                        if _side_deviation(patches[a], side_a, patches[b], side_b, orientation, n) <= tol:
                            found.append(InterfaceDescriptor(
                                patch_a=a, side_a=side_a, patch_b=b, side_b=side_b, orientation=orientation,
                            ))
                            used.update({(a, side_a), (b, side_b)})
                            break
    logger.debug("detected %d interfaces among %d patches", len(found), len(patches))
    return found


class MultipatchGeometry:
    def __init__(
        self,
        patches: Sequence[PatchMap],
        interfaces: Optional[Sequence[InterfaceDescriptor]] = None,
        name: str = "multipatch",
    ):
        if not patches:
            raise ConformityError("a multipatch geometry needs at least one patch")
        dims = {p.dim for p in patches}
        if len(dims) != 1:
            raise ConformityError("all patches must share one parametric dimension")
        self.patches = list(patches)
        self.dim = dims.pop()
        self.name = name
        self.interfaces = list(detect_interfaces(self.patches) if interfaces is None else interfaces)
        self._check()

    def _check(self):
        seen = set()
        n = settings.VALIDATION_SAMPLES
        for iface in self.interfaces:
            for patch, side in ((iface.patch_a, iface.side_a), (iface.patch_b, iface.side_b)):
                if patch >= len(self.patches) or SIDES[side][0] >= self.dim:
                    raise ConformityError(f"interface {iface} refers to a side that does not exist")
                if (patch, side) in seen:
                    raise ConformityError(f"side {side} of patch {patch} appears in two interfaces")
                seen.add((patch, side))
            if self.dim == 3 and iface.orientation != "same":
                raise ConformityError(f"face interface {iface}: only matching face orientations are supported")
            deviation = _side_deviation(
                self.patches[iface.patch_a], iface.side_a,
                self.patches[iface.patch_b], iface.side_b, iface.orientation, n,
            )
            if deviation > settings.GEOMETRY_TOLERANCE:
                raise ConformityError(f"parametrisations disagree on {iface} by {deviation:.3g}")
        centres = np.array([
            [float(np.asarray(c)) for c in p.evaluate(*([0.5] * self.dim))] for p in self.patches
        ])
        for a in range(len(centres)):
            for b in range(a + 1, len(centres)):
                if np.linalg.norm(centres[a] - centres[b]) < settings.GEOMETRY_TOLERANCE:
                    raise ConformityError(f"patches {a} and {b} overlap")

    @property
    def n_patches(self) -> int:
        return len(self.patches)

    def __repr__(self):
        return f"<MultipatchGeometry {self.name}: {self.n_patches} patches, {len(self.interfaces)} interfaces>"


def as_multipatch(geometry: Union[PatchMap, MultipatchGeometry]) -> MultipatchGeometry:
    if isinstance(geometry, MultipatchGeometry):
        return geometry
    return MultipatchGeometry([geometry], [], name=geometry.name)


class PatchDiscretisation(BaseModel):
    """Primal knot vectors (with degrees) of one patch."""
    knots: Tuple[KnotVector, ...]

    model_config = ConfigDict(frozen=True)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(kv.degree for kv in self.knots)

    @classmethod
    def uniform(cls, dim: int, degrees, n_elements: int = 2, levels: int = 0) -> "PatchDiscretisation":
        if isinstance(degrees, int):
            degrees = [degrees] * dim
        if len(degrees) == 1:
            degrees = list(degrees) * dim
        if len(degrees) != dim:
            raise SpaceMismatchError(f"need 1 or {dim} degrees, got {len(degrees)}")
        return cls(knots=tuple(refine(make_knots(p, n_elements), levels) for p in degrees))

    def refined(self, levels: int = 1) -> "PatchDiscretisation":
        return PatchDiscretisation(knots=tuple(refine(kv, levels) for kv in self.knots))

    @property
    def mesh_size(self) -> float:
        return max(kv.mesh_size for kv in self.knots)


Discretisations = Union[PatchDiscretisation, Sequence[PatchDiscretisation]]


def _per_patch(geom: MultipatchGeometry, discretisations: Discretisations) -> List[PatchDiscretisation]:
    if isinstance(discretisations, PatchDiscretisation):
        return [discretisations] * geom.n_patches
    discretisations = list(discretisations)
    if len(discretisations) != geom.n_patches:
        raise SpaceMismatchError(f"need {geom.n_patches} discretisations, got {len(discretisations)}")
    return discretisations


def _face_knots(disc: PatchDiscretisation, dim: int, side: str, orientation: str) -> List[KnotVector]:
    knots = [disc.knots[a] for a in face_axes(dim, side)]
    return [kv.reversed() for kv in knots] if orientation == "reversed" else knots


def _inferred_orientation(geom: MultipatchGeometry, iface: InterfaceDescriptor) -> Optional[str]:
    options = ("same", "reversed") if geom.dim == 2 else ("same",)
    pa, pb = geom.patches[iface.patch_a], geom.patches[iface.patch_b]
    for orientation in options:
        dev = _side_deviation(pa, iface.side_a, pb, iface.side_b, orientation, settings.VALIDATION_SAMPLES)
        if dev <= settings.GEOMETRY_TOLERANCE:
            return orientation
    return None


def validate_conformity(geom: MultipatchGeometry, discretisations: Discretisations) -> ConformityReport:
    """Per-interface checks of parametrisation, knots and degrees. Never raises on mismatch."""
    discs = _per_patch(geom, discretisations)
    reports = []
    for iface in geom.interfaces:
        pa, pb = geom.patches[iface.patch_a], geom.patches[iface.patch_b]
        deviation = _side_deviation(pa, iface.side_a, pb, iface.side_b, iface.orientation, settings.VALIDATION_SAMPLES)
        ka = _face_knots(discs[iface.patch_a], geom.dim, iface.side_a, "same")
        kb = _face_knots(discs[iface.patch_b], geom.dim, iface.side_b, iface.orientation)
        reports.append(InterfaceReport(
            interface=iface,
            parametrisation_match=deviation <= settings.GEOMETRY_TOLERANCE,
            max_deviation=deviation,
            knot_match=all(a.matches(b) for a, b in zip(ka, kb)),
            degree_match=all(a.degree == b.degree for a, b in zip(ka, kb)),
            orientation=_inferred_orientation(geom, iface),
        ))
    return ConformityReport(interfaces=reports)


class _SignedUnion:
    """Union-find over unknowns with ``value[x] = sign[x] * value[parent[x]]``."""

    def __init__(self, n: int):
        self.parent = np.arange(n)
        self.sign = np.ones(n, dtype=int)

    def find(self, x: int) -> Tuple[int, int]:
        root, total = x, 1
        while self.parent[root] != root:
            total *= self.sign[root]
            root = self.parent[root]
        node, s = x, total
        while self.parent[node] != node:
            nxt, own = self.parent[node], self.sign[node]
            self.parent[node], self.sign[node] = root, s
            s *= own
            node = nxt
        return int(root), int(total)

    def union(self, x: int, y: int, s: int):
        """Record ``value[y] = s * value[x]``."""
        rx, sx = self.find(x)
        ry, sy = self.find(y)
        if rx == ry:
            if sy != s * sx:
                raise ConformityError("interface orientations are inconsistent around a shared vertex")
            return
        self.parent[ry] = rx
        self.sign[ry] = s * sx * sy


def _trace_type(dim: int, role: int) -> Optional[str]:
    if role == 0:
        return "value"
    if role == dim:
        return None
    if dim == 2 or role == 2:
        return "normal"
    return "tangential"


def _side_indices(space: ComplexSpace, offset: int, component: int, side: str) -> np.ndarray:
    start = offset + sum(space.component_dimensions[:component])
    index = start + np.arange(space.component_dimensions[component]).reshape(space.shapes[component])
    axis, end = SIDES[side]
    return np.take(index, 0 if end == 0 else -1, axis=axis)


def _glued_components(dim: int, role: int, iface: InterfaceDescriptor) -> List[Tuple[int, int, int]]:
    """``(component_a, component_b, sign)`` triples carrying the interface trace."""
    kind = _trace_type(dim, role)
    if kind is None:
        return []
    if kind == "value":
        return [(0, 0, 1)]
    axis_a, axis_b = SIDES[iface.side_a][0], SIDES[iface.side_b][0]
    if kind == "normal":
        return [(axis_a, axis_b, -side_sign(iface.side_a) * side_sign(iface.side_b))]
    return list(zip(face_axes(dim, iface.side_a), face_axes(dim, iface.side_b), (1, 1)))


class GlobalSpace:
    """Globally conforming role-k space on a multipatch geometry."""

    def __init__(self, geometry: MultipatchGeometry, role: int, discretisations: Sequence[PatchDiscretisation]):
        self.geometry = geometry
        self.role = role
        self.discretisations = list(discretisations)
        self.families = [
            build_complex(geometry.dim, d.degrees, d.knots) for d in self.discretisations
        ]
        self.local_spaces = [family[role] for family in self.families]
        dims = [s.dimension for s in self.local_spaces]
        self.offsets = np.concatenate([[0], np.cumsum(dims)]).astype(int)
        self.n_local = int(self.offsets[-1])

        union = _SignedUnion(self.n_local)
        for iface in geometry.interfaces:
            sa, sb = self.local_spaces[iface.patch_a], self.local_spaces[iface.patch_b]
            for ca, cb, sign in _glued_components(geometry.dim, role, iface):
                ia = _side_indices(sa, self.offsets[iface.patch_a], ca, iface.side_a)
                ib = _side_indices(sb, self.offsets[iface.patch_b], cb, iface.side_b)
                if iface.orientation == "reversed":
                    ib = ib[::-1]
                if ia.shape != ib.shape:
                    raise ConformityError(f"interface {iface}: {ia.shape} vs {ib.shape} boundary coefficients")
                for x, y in zip(ia.ravel(), ib.ravel()):
                    union.union(int(x), int(y), sign)

        roots = np.empty(self.n_local, dtype=int)
        signs = np.empty(self.n_local, dtype=int)
        for l in range(self.n_local):
            roots[l], signs[l] = union.find(l)
        _, first, dof_map = np.unique(roots, return_index=True, return_inverse=True)
        # number global unknowns by first local occurrence
        order = np.argsort(np.argsort(first))
        self.dof_map = order[dof_map]
        self.signs = signs
        self.dimension = int(first.size)
        logger.debug("global role-%d space: %d local -> %d global", role, self.n_local, self.dimension)

    @property
    def n_patches(self) -> int:
        return self.geometry.n_patches

    def local_to_global(self) -> scipy.sparse.csr_matrix:
        """``P`` with ``local = P @ global``."""
        return scipy.sparse.csr_matrix(
            (self.signs.astype(float), (np.arange(self.n_local), self.dof_map)),
            shape=(self.n_local, self.dimension),
        )

    def scatter(self, coefficients: np.ndarray) -> List[CoefficientField]:
        local = self.signs * np.asarray(coefficients, dtype=float)[self.dof_map]
        return [
            CoefficientField.from_flat(space, local[self.offsets[j]:self.offsets[j + 1]])
            for j, space in enumerate(self.local_spaces)
        ]

    def gather(self, fields: Sequence[CoefficientField]) -> Tuple[np.ndarray, float]:
        """Average the signed local coefficients; also return their largest disagreement."""
        local = np.concatenate([f.flat() for f in fields]) * self.signs
        counts = np.bincount(self.dof_map, minlength=self.dimension)
        mean = np.bincount(self.dof_map, weights=local, minlength=self.dimension) / counts
        disagreement = float(np.max(np.abs(local - mean[self.dof_map]))) if local.size else 0.0
        return mean, disagreement


@dataclass(frozen=True)
class GlobalField:
    space: GlobalSpace
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (self.space.dimension,):
            raise SpaceMismatchError(f"expected {self.space.dimension} global coefficients, got {c.shape}")
        object.__setattr__(self, "coefficients", c)

    def patch_fields(self) -> List[CoefficientField]:
        return self.space.scatter(self.coefficients)

    def restrict(self, patch: int) -> CoefficientField:
        return self.patch_fields()[patch]


def build_global_space(geom: MultipatchGeometry, role: int, discretisations: Discretisations) -> GlobalSpace:
    if not 0 <= role <= geom.dim:
        raise SpaceMismatchError(f"role {role} out of range 0..{geom.dim}")
    discs = _per_patch(geom, discretisations)
    report = validate_conformity(geom, discs)
    if not report.passed:
        bad = ", ".join(str(r.interface) for r in report.failures())
        raise ConformityError(f"non-conforming interfaces: {bad}", report=report)
    return GlobalSpace(geom, role, discs)


def pullback_patchwise(geom: MultipatchGeometry, role: int, f: Callable) -> List[Callable]:
    return [pullback(role, patch, f) for patch in geom.patches]


def global_interpolant(space: GlobalSpace, functions, kind: str = "tilde") -> GlobalField:
    """Interpolate every patch independently and glue; identified coefficients must agree."""
    if callable(functions) and not isinstance(functions, (list, tuple)):
        functions = [functions] * space.n_patches
    if len(functions) != space.n_patches:
        raise SpaceMismatchError(f"need one reference function per patch ({space.n_patches})")
    fields = [
        interpolate(family, space.role, f, kind) for family, f in zip(space.families, functions)
    ]
    coefficients, disagreement = space.gather(fields)
    scale = max(1.0, float(np.max(np.abs(coefficients))) if coefficients.size else 1.0)
    if disagreement > settings.INTERFACE_TOLERANCE * scale:
        raise ConformityError(
            f"patch interpolants disagree on shared coefficients by {disagreement:.3g}; "
            "the input is not conforming across interfaces"
        )
    return GlobalField(space, coefficients)


def _interface(space: GlobalSpace, interface: Union[int, InterfaceDescriptor]) -> InterfaceDescriptor:
    interfaces = space.geometry.interfaces
    if isinstance(interface, int):
        if not 0 <= interface < len(interfaces):
            raise ConformityError(f"unknown interface index {interface}")
        return interfaces[interface]
    if interface not in interfaces:
        raise ConformityError(f"unknown interface {interface}")
    return interface


def interface_jump(
    space: GlobalSpace,
    field: GlobalField,
    interface: Union[int, InterfaceDescriptor],
    n_samples: Optional[int] = None,
) -> Optional[float]:
    """Largest trace mismatch across one interface; None for the top role."""
    iface = _interface(space, interface)
    dim = space.geometry.dim
    pairs = _glued_components(dim, space.role, iface)
    if not pairs:
        return None
    n = settings.INTERFACE_SAMPLES if n_samples is None else n_samples
    if dim == 2:
        params = [np.linspace(0.0, 1.0, n)]
    else:
        m = int(np.ceil(np.sqrt(n)))
        s, t = np.meshgrid(np.linspace(0.0, 1.0, m), np.linspace(0.0, 1.0, m), indexing="ij")
        params = [s.ravel(), t.ravel()]
    fields = field.patch_fields()
    va = fields[iface.patch_a](*side_coordinates(dim, iface.side_a, params))
    vb = fields[iface.patch_b](*side_coordinates(dim, iface.side_b, _map_params(params, iface.orientation)))
    return max(float(np.max(np.abs(va[ca] - sign * vb[cb]))) for ca, cb, sign in pairs)


def global_commuting_residual(
    geom: MultipatchGeometry,
    discretisations: Discretisations,
    solution: ManufacturedSolution,
    kind: str = "tilde",
    roles: Optional[Sequence[int]] = None,
) -> Dict[str, float]:
    """Patchwise ``max |D(P_k f) - P_{k+1}(D f)|`` for the role pairs starting at ``roles`` (default: all)."""
    discs = _per_patch(geom, discretisations)
    residuals = {}
    for role in (range(geom.dim) if roles is None else roles):
        worst = 0.0
        for patch, disc in zip(geom.patches, discs):
            family = build_complex(geom.dim, disc.degrees, disc.knots)
            data = reference_function(solution, patch, role)
            worst = max(worst, commuting_residual(family, role, data.values, data.derivative, kind))
        residuals[f"{role}->{role + 1}"] = worst
        logger.debug("commuting residual %d->%d on %s: %.3g", role, role + 1, geom.name, worst)
    return residuals
