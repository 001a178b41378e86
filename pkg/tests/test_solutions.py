import numpy as np
import pytest

from splinecomplex.catalog import geometry_catalog
from splinecomplex.complex import differential, random_field
from splinecomplex.errors import ConfigError
from splinecomplex.solutions import SOLUTIONS, discrete_reference, get_solution, reference_function

STEP = 1e-5


def partial(f, x, a, component=None):
    """Central difference of ``f`` along axis ``a`` at the point stack ``x``."""
    shift = np.zeros((len(x), 1))
    shift[a] = STEP
    plus, minus = f(*(x + shift)), f(*(x - shift))
    if component is not None:
        plus, minus = plus[component], minus[component]
    return (np.asarray(plus) - np.asarray(minus)) / (2 * STEP)


@pytest.fixture
def points_2d(rng):
    return rng.uniform(0.05, 0.95, size=(2, 12))


@pytest.fixture
def points_3d(rng):
    return rng.uniform(0.05, 0.95, size=(3, 12))


@pytest.mark.parametrize("name", list(SOLUTIONS) + ["random"])
def test_gradients_match_finite_differences(name, rng):
    solution = get_solution(name, seed=3)
    # keep away from the kink of the rough solution
    x = rng.uniform(0.55, 0.95, size=(3, 12))
    gradient = solution.gradient(*x)
    for a in range(3):
        np.testing.assert_allclose(gradient[a] + 0 * x[0], partial(solution.value, x, a), atol=1e-7)


def test_solution_lookup():
    assert get_solution("rough").smooth is False
    assert get_solution("wave").smooth
    x = np.linspace(0.0, 1.0, 5)
    np.testing.assert_array_equal(get_solution("random", 7).value(x, x, x), get_solution("random", 7).value(x, x, x))
    assert get_solution("random", 7).name == "random-7"
    with pytest.raises(ConfigError):
        get_solution("gaussian")


def test_role_out_of_range():
    with pytest.raises(ConfigError):
        reference_function(get_solution("wave"), geometry_catalog("flat-square"), 3)


def test_scalar_and_curl_on_surface(points_2d):
    patch = geometry_catalog("cylinder-shell")
    ref = reference_function(get_solution("wave"), patch, 0)
    curl = ref.derivative(*points_2d)
    np.testing.assert_allclose(curl[0], partial(ref.values, points_2d, 1), atol=1e-7)
    np.testing.assert_allclose(curl[1], -partial(ref.values, points_2d, 0), atol=1e-7)
    gradient = ref.gradient(*points_2d)
    np.testing.assert_allclose(gradient[0], partial(ref.values, points_2d, 0), atol=1e-7)


@pytest.mark.parametrize("name", ["sine-product", "trilinear"])
def test_surface_flux_divergence(name, points_2d):
    ref = reference_function(get_solution(name), geometry_catalog("quarter-annulus-nurbs"), 1)
    assert ref.n_components == 2
    div = sum(partial(ref.values, points_2d, a, component=a) for a in range(2))
    np.testing.assert_allclose(ref.derivative(*points_2d), div, atol=1e-6)


def test_surface_flux_normal_trace_is_a_curl():
    patch = geometry_catalog("flat-square")
    solution = get_solution("wave")
    flux = reference_function(solution, patch, 1)
    curl = reference_function(solution, patch, 0).derivative
    v = np.linspace(0.0, 1.0, 7)
    for u in (0.0, 1.0):
        side = np.full_like(v, u)
        np.testing.assert_allclose(flux(side, v)[0], curl(side, v)[0], atol=1e-14)


def test_density_is_weighted_by_measure(points_2d):
    patch = geometry_catalog("cylinder-shell")
    solution = get_solution("sine-product")
    density = reference_function(solution, patch, 2)
    assert density.derivative is None
    expected = 0.5 * np.pi * solution.value(*patch.evaluate(*points_2d))
    np.testing.assert_allclose(density(*points_2d), expected, atol=1e-14)


def test_volume_curl_and_divergence(points_3d):
    patch = geometry_catalog("distorted-cube")
    solution = get_solution("wave")
    field = reference_function(solution, patch, 1)
    curl = field.derivative(*points_3d)

    def d(a, c):
        return partial(field.values, points_3d, a, component=c)

    np.testing.assert_allclose(curl[0], d(1, 2) - d(2, 1), atol=1e-6)
    np.testing.assert_allclose(curl[1], d(2, 0) - d(0, 2), atol=1e-6)
    np.testing.assert_allclose(curl[2], d(0, 1) - d(1, 0), atol=1e-6)
    assert np.max(np.abs(curl)) > 1e-3

    flux = reference_function(solution, patch, 2)
    div = sum(partial(flux.values, points_3d, a, component=a) for a in range(3))
    np.testing.assert_allclose(flux.derivative(*points_3d), div, atol=1e-6)


def test_volume_gradient(points_3d):
    patch = geometry_catalog("distorted-cube")
    ref = reference_function(get_solution("trilinear"), patch, 0)
    grad = ref.derivative(*points_3d)
    for a in range(3):
        np.testing.assert_allclose(grad[a], partial(ref.values, points_3d, a), atol=1e-7)


def test_discrete_reference(family_2d, rng, points_2d):
    field = random_field(family_2d[0], rng)
    ref = discrete_reference(field)
    np.testing.assert_allclose(ref(*points_2d), field(*points_2d)[0])
    np.testing.assert_allclose(np.asarray(ref.derivative(*points_2d)), differential(field)(*points_2d))
    np.testing.assert_allclose(ref.gradient(*points_2d)[0], partial(ref.values, points_2d, 0), atol=1e-6)
    top = discrete_reference(random_field(family_2d[2], rng))
    assert top.derivative is None and top.gradient is None
