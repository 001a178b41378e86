"""Built-in test geometries and loading of geometry description files."""
import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, Tuple, Union

import numpy as np

from schemas.geometry_schema import GeometryFileSchema, PatchSchema
from splinecomplex.errors import GeometryError
from splinecomplex.geometry import AffinePatch, AnalyticPatch, NurbsPatch, PatchMap
from splinecomplex.knots import KnotVector
from splinecomplex.multipatch import MultipatchGeometry, PatchDiscretisation

logger = logging.getLogger(__name__)

PLANE = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]
IDENTITY = np.eye(3).tolist()


def _flat_square():
    return AffinePatch((0.0, 0.0, 0.0), PLANE, name="flat-square")


def _cylinder_shell():
    h = 0.5 * np.pi

    def mapping(u, v):
        return np.cos(h * u), np.sin(h * u), v + 0 * u

    def jacobian(u, v):
        zero = 0 * (u + v)
        return (
            (-h * np.sin(h * u) + zero, zero),
            (h * np.cos(h * u) + zero, zero),
            (zero, zero + 1.0),
        )

    return AnalyticPatch(2, mapping, jacobian, name="cylinder-shell")


def _quarter_annulus():
    w = np.sqrt(0.5)
    radii = (1.0, 2.0)
    points = np.array([[[r, 0.0, 0.0], [r, r, 0.0], [0.0, r, 0.0]] for r in radii]).transpose(1, 0, 2)
    weights = np.array([[1.0, 1.0], [w, w], [1.0, 1.0]])
    knots = (
        KnotVector(degree=2, knots=(0.0, 0.0, 0.0, 1.0, 1.0, 1.0)),
        KnotVector(degree=1, knots=(0.0, 0.0, 1.0, 1.0)),
    )
    return NurbsPatch(knots, points, weights, name="quarter-annulus-nurbs")


# origin, first axis, second axis; first x second is the outward normal
CUBE_FACES = [
    ((0, 0, 0), (0, 1, 0), (1, 0, 0)),
    ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    ((0, 0, 0), (1, 0, 0), (0, 0, 1)),
    ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
    ((0, 0, 0), (0, 0, 1), (0, 1, 0)),
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
]
CUBE_FACE_NAMES = ["bottom", "top", "front", "back", "left", "right"]


def _cube_surface():
    patches = [
        AffinePatch(o, np.array([a, b], dtype=float).T, name=f"cube-{n}")
        for (o, a, b), n in zip(CUBE_FACES, CUBE_FACE_NAMES)
    ]
    return MultipatchGeometry(patches, name="cube-surface")


def _two_squares():
    return MultipatchGeometry([
        AffinePatch((0.0, 0.0, 0.0), PLANE, name="left-square"),
        AffinePatch((1.0, 0.0, 0.0), PLANE, name="right-square"),
    ], name="two-squares")


def _unit_cube():
    return AffinePatch((0.0, 0.0, 0.0), IDENTITY, name="unit-cube")


def _distorted_cube(eps: float = 0.05):
    p = np.pi

    def bump(x, y, z):
        return eps * np.sin(p * x) * np.sin(p * y) * np.sin(p * z)

    def mapping(x, y, z):
        b = bump(x, y, z)
        return x + b, y + b, z + b

    def jacobian(x, y, z):
        sx, sy, sz = np.sin(p * x), np.sin(p * y), np.sin(p * z)
        grad = (
            eps * p * np.cos(p * x) * sy * sz,
            eps * p * sx * np.cos(p * y) * sz,
            eps * p * sx * sy * np.cos(p * z),
        )
        return tuple(tuple(grad[a] + (1.0 if a == i else 0.0) for a in range(3)) for i in range(3))

    return AnalyticPatch(3, mapping, jacobian, name="distorted-cube")


def _two_cubes():
    return MultipatchGeometry([
        AffinePatch((0.0, 0.0, 0.0), IDENTITY, name="left-cube"),
        AffinePatch((1.0, 0.0, 0.0), IDENTITY, name="right-cube"),
    ], name="two-cubes")


CATALOG: Dict[str, Tuple[Callable, str]] = {
    "flat-square": (_flat_square, "unit square in the plane z = 0"),
    "cylinder-shell": (_cylinder_shell, "quarter cylinder of radius 1 and height 1"),
    "quarter-annulus-nurbs": (_quarter_annulus, "rational quadratic quarter annulus, radii 1 and 2"),
    "cube-surface": (_cube_surface, "boundary of the unit cube, 6 affine patches"),
    "two-squares": (_two_squares, "[0,2] x [0,1] split into two patches"),
    "unit-cube": (_unit_cube, "the unit cube as one volume patch"),
    "distorted-cube": (_distorted_cube, "unit cube under a smooth interior bump"),
    "two-cubes": (_two_cubes, "[0,2] x [0,1]^2 split into two volume patches"),
}


def geometry_catalog(name: str) -> Union[PatchMap, MultipatchGeometry]:
    try:
        factory, _ = CATALOG[name]
    except KeyError:
        raise GeometryError(f"unknown geometry {name!r}; known: {', '.join(CATALOG)}") from None
    return factory()


def _patch_from_schema(patch: PatchSchema) -> PatchMap:
    if patch.catalog is not None:
        geometry = geometry_catalog(patch.catalog)
        if isinstance(geometry, MultipatchGeometry):
            raise GeometryError(f"{patch.catalog} is a multipatch geometry, not a single patch")
        return geometry
    if patch.affine is not None:
        return AffinePatch(patch.affine.origin, patch.affine.axes)
    return NurbsPatch(patch.nurbs.knots, patch.nurbs.control_points, patch.nurbs.weights)


def load_geometry(data: GeometryFileSchema) -> Tuple[MultipatchGeometry, List[PatchDiscretisation]]:
    """Geometry and per-patch discretisations described by a geometry file."""
    if data.catalog is not None:
        geometry = geometry_catalog(data.catalog)
        if not isinstance(geometry, MultipatchGeometry):
            geometry = MultipatchGeometry([geometry], [], name=data.catalog)
    else:
        geometry = MultipatchGeometry([_patch_from_schema(p) for p in data.patches], data.interfaces)

    disc = data.discretisation
    if disc.knots is not None:
        base = PatchDiscretisation(knots=tuple(disc.knots))
    else:
        base = PatchDiscretisation.uniform(geometry.dim, disc.degrees, disc.elements, disc.levels)
    discretisations = [base.refined(disc.patch_refinements.get(j, 0)) for j in range(geometry.n_patches)]
    return geometry, discretisations


def load_geometry_file(path: Union[str, Path]) -> Tuple[MultipatchGeometry, List[PatchDiscretisation]]:
    text = Path(path).read_text(encoding="utf-8")
    return load_geometry(GeometryFileSchema.model_validate(json.loads(text)))
