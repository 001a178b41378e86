import numpy as np
import pytest

from splinecomplex.catalog import CATALOG, geometry_catalog
from splinecomplex.errors import GeometryError
from splinecomplex.geometry import (
    AffinePatch,
    NurbsPatch,
    first_fundamental_form,
    inverse_matrices,
    jacobian_determinant,
    measure,
    pullback,
    pullback_surface,
    pullback_volume,
    pushforward,
    pushforward_surface,
    surface_measure,
)
from splinecomplex.knots import KnotVector
from splinecomplex.multipatch import MultipatchGeometry

PI = np.pi
STEP = 1e-5


@pytest.fixture
def points_2d(rng):
    return rng.uniform(0.05, 0.95, size=(2, 200))


@pytest.fixture
def points_3d(rng):
    return rng.uniform(0.05, 0.95, size=(3, 200))


def physical_scalar(x, y, z):
    return np.sin(x) * np.cos(2 * y) + z * x


def physical_vector(x, y, z):
    return [y * z + np.cos(x), x * x - z, np.sin(y) + x * z]


def test_surface_measures(points_2d):
    u, v = points_2d
    np.testing.assert_allclose(surface_measure(geometry_catalog("flat-square"), u, v), 1.0)
    np.testing.assert_allclose(surface_measure(geometry_catalog("cylinder-shell"), u, v), PI / 2)
    scaled = AffinePatch((0.0, 0.0, 0.0), [[2.0, 0.0], [0.0, 3.0], [0.0, 0.0]])
    np.testing.assert_allclose(surface_measure(scaled, u, v), 6.0)


def test_jacobian_determinants(points_3d):
    np.testing.assert_allclose(jacobian_determinant(geometry_catalog("unit-cube"), *points_3d), 1.0)
    assert np.all(measure(geometry_catalog("distorted-cube"), *points_3d) > 0.5)
    with pytest.raises(GeometryError):
        jacobian_determinant(geometry_catalog("flat-square"), *points_3d[:2])


def test_degenerate_maps_are_rejected():
    with pytest.raises(GeometryError):
        AffinePatch((0.0, 0.0, 0.0), [[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
    with pytest.raises(GeometryError):
        AffinePatch((0.0, 0.0, 0.0), -np.eye(3))
    with pytest.raises(GeometryError):
        AffinePatch((0.0, 0.0), np.eye(3))


def test_nurbs_annulus_lies_on_circles(rng):
    annulus = geometry_catalog("quarter-annulus-nurbs")
    u = rng.uniform(size=20)
    for v, radius in ((0.0, 1.0), (1.0, 2.0)):
        x, y, z = annulus.evaluate(u, np.full_like(u, v))
        np.testing.assert_allclose(np.hypot(x, y), radius, atol=1e-13)
        np.testing.assert_allclose(z, 0.0)


def test_nurbs_jacobian_matches_finite_differences(points_2d):
    annulus = geometry_catalog("quarter-annulus-nurbs")
    u, v = points_2d
    J = annulus.jacobian(u, v)
    du = (np.array(annulus.evaluate(u + STEP, v)) - np.array(annulus.evaluate(u - STEP, v))) / (2 * STEP)
    dv = (np.array(annulus.evaluate(u, v + STEP)) - np.array(annulus.evaluate(u, v - STEP))) / (2 * STEP)
    np.testing.assert_allclose(J[:, 0], du, atol=1e-8)
    np.testing.assert_allclose(J[:, 1], dv, atol=1e-8)


def test_nurbs_input_checks():
    kv = KnotVector(degree=1, knots=(0.0, 0.0, 1.0, 1.0))
    points = np.zeros((2, 2, 3))
    points[1, :, 0] = 1.0
    points[:, 1, 1] = 1.0
    NurbsPatch((kv, kv), points, np.ones((2, 2)))
    with pytest.raises(GeometryError):
        NurbsPatch((kv, kv), points, -np.ones((2, 2)))
    with pytest.raises(GeometryError):
        NurbsPatch((kv, kv), points[:, :1], np.ones((2, 1)))
    repeated = KnotVector(degree=2, knots=(0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0))
    with pytest.raises(GeometryError):
        NurbsPatch((repeated, kv), np.zeros((5, 2, 3)), np.ones((5, 2)))


def test_first_fundamental_form_of_cylinder(points_2d):
    G = first_fundamental_form(geometry_catalog("cylinder-shell"), *points_2d)
    np.testing.assert_allclose(G[0, 0], (PI / 2) ** 2)
    np.testing.assert_allclose(G[0, 1], 0.0, atol=1e-15)
    np.testing.assert_allclose(G[1, 1], 1.0)


@pytest.mark.parametrize("n", [2, 3])
def test_inverse_matrices(n, rng):
    A = rng.standard_normal((n, n, 4, 5)) + 3 * np.eye(n)[:, :, None, None]
    inv = inverse_matrices(A)
    assert inv.shape == A.shape
    np.testing.assert_allclose(np.einsum("ij...,jk...->ik...", inv, A), np.broadcast_to(np.eye(n)[:, :, None, None], A.shape), atol=1e-12)


@pytest.mark.parametrize("role", [0, 1, 2, 3])
def test_identity_pullbacks(role, points_3d):
    cube = geometry_catalog("unit-cube")
    f = physical_scalar if role in (0, 3) else physical_vector
    pulled = pullback(role, cube, f)(*points_3d)
    np.testing.assert_allclose(np.asarray(pulled), np.asarray(f(*points_3d)), atol=1e-14)


def test_flat_surface_pullbacks(points_2d):
    flat = geometry_catalog("flat-square")
    u, v = points_2d
    z = np.zeros_like(u)
    np.testing.assert_allclose(pullback_surface(0, flat, physical_scalar)(u, v), physical_scalar(u, v, z))
    np.testing.assert_allclose(pullback_surface(2, flat, physical_scalar)(u, v), physical_scalar(u, v, z))
    np.testing.assert_allclose(pushforward_surface(2, flat, lambda u, v: 1.0 + 0 * u)(u, v), 1.0)


@pytest.mark.parametrize("role", [0, 1, 2, 3])
def test_volume_round_trip(role, points_3d):
    cube = geometry_catalog("distorted-cube")
    f = physical_scalar if role in (0, 3) else physical_vector
    pulled = pullback_volume(role, cube, f)
    back = pushforward(role, cube, pulled)(*points_3d)
    np.testing.assert_allclose(np.asarray(back), np.asarray(f(*cube.evaluate(*points_3d))), atol=1e-12)


@pytest.mark.parametrize("role", [0, 2])
def test_surface_round_trip(role, points_2d):
    shell = geometry_catalog("cylinder-shell")
    back = pushforward_surface(role, shell, pullback_surface(role, shell, physical_scalar))(*points_2d)
    np.testing.assert_allclose(back, physical_scalar(*shell.evaluate(*points_2d)), atol=1e-12)


def test_surface_round_trip_of_tangential_field(points_2d):
    shell = geometry_catalog("cylinder-shell")

    def tangential(x, y, z):
        # azimuthal plus axial field on the cylinder x^2 + y^2 = 1
        return [-y * z, x * z, np.cos(x) + 0 * z]

    back = pushforward_surface(1, shell, pullback_surface(1, shell, tangential))(*points_2d)
    np.testing.assert_allclose(np.asarray(back), np.asarray(tangential(*shell.evaluate(*points_2d))), atol=1e-12)


def test_gradient_pullback_is_reference_gradient(points_3d):
    cube = geometry_catalog("distorted-cube")

    def grad(x, y, z):
        return [np.cos(x) * np.cos(2 * y) + z, -2 * np.sin(x) * np.sin(2 * y), x]

    scalar = pullback_volume(0, cube, physical_scalar)
    pulled = pullback_volume(1, cube, grad)(*points_3d)
    for a in range(3):
        shift = np.zeros((3, 1))
        shift[a] = STEP
        fd = (scalar(*(points_3d + shift)) - scalar(*(points_3d - shift))) / (2 * STEP)
        np.testing.assert_allclose(pulled[a], fd, atol=1e-7)


def test_divergence_pullback_is_reference_divergence(points_3d):
    cube = geometry_catalog("distorted-cube")

    def div(x, y, z):
        return -np.sin(x) + 0 * y + x

    flux = pullback_volume(2, cube, physical_vector)
    density = pullback_volume(3, cube, div)(*points_3d)
    fd = 0.0
    for a in range(3):
        shift = np.zeros((3, 1))
        shift[a] = STEP
        fd = fd + (flux(*(points_3d + shift))[a] - flux(*(points_3d - shift))[a]) / (2 * STEP)
    np.testing.assert_allclose(density, fd, atol=1e-6)


def test_surface_flux_pullback_commutes_with_divergence(points_2d):
    shell = geometry_catalog("cylinder-shell")

    def flux(x, y, z):
        # tangent to the cylinder x^2 + y^2 = 1
        h = x + z * z
        return [-y * h, x * h, y * z * z]

    def surface_div(x, y, z):
        return -y + 2 * y * z

    pulled = pullback_surface(1, shell, flux)
    density = pullback_surface(2, shell, surface_div)(*points_2d)
    fd = 0.0
    for a in range(2):
        shift = np.zeros((2, 1))
        shift[a] = STEP
        fd = fd + (pulled(*(points_2d + shift))[a] - pulled(*(points_2d - shift))[a]) / (2 * STEP)
    np.testing.assert_allclose(density, fd, atol=1e-6)


def test_catalog():
    for name in CATALOG:
        geometry = geometry_catalog(name)
        assert geometry.dim in (2, 3)
    cube = geometry_catalog("cube-surface")
    assert isinstance(cube, MultipatchGeometry)
    assert cube.n_patches == 6
    assert len(cube.interfaces) == 12
    assert len(geometry_catalog("two-squares").interfaces) == 1
    assert len(geometry_catalog("two-cubes").interfaces) == 1
    with pytest.raises(GeometryError):
        geometry_catalog("moebius")
