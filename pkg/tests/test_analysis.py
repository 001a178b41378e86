import numpy as np
import pytest
import scipy.linalg

from splinecomplex.analysis import applicable_norms, error_norm, error_norms, error_report, l2_project, l2_system
from splinecomplex.catalog import geometry_catalog
from splinecomplex.complex import CoefficientField, build_complex, interpolate, random_field
from splinecomplex.errors import SingularGramError, SpaceMismatchError
from splinecomplex.geometry import first_fundamental_form, surface_measure
from splinecomplex.knots import make_knots
from splinecomplex.multipatch import PatchDiscretisation, build_global_space, global_interpolant
from splinecomplex.solutions import discrete_reference, get_solution, reference_function


def one(*x):
    return 1.0 + 0 * sum(x)


@pytest.fixture
def surface_family():
    return build_complex(2, 2, [make_knots(2, 4), make_knots(2, 2)])


def test_applicable_norms():
    assert applicable_norms(2, 0) == ("L2", "H1semi", "H1")
    assert applicable_norms(3, 1) == ("L2", "Hcurl")
    assert applicable_norms(3, 3) == ("L2",)


def test_l2_norm_of_a_constant(surface_family):
    zero = CoefficientField.zeros(surface_family[0])
    assert error_norm(zero, one, "L2", geometry_catalog("flat-square")) == pytest.approx(1.0, abs=1e-13)
    assert error_norm(zero, one, "L2") == pytest.approx(1.0, abs=1e-13)
    shell = geometry_catalog("cylinder-shell")
    assert error_norm(zero, one, "L2", shell) == pytest.approx(np.sqrt(np.pi / 2), abs=1e-13)


def test_density_norm_uses_physical_values(surface_family):
    shell = geometry_catalog("cylinder-shell")
    zero = CoefficientField.zeros(surface_family[2])
    # a unit physical density pulls back to the surface measure
    density = reference_function(get_solution("constant"), shell, 2)
    assert error_norm(zero, density, "L2", shell) == pytest.approx(np.sqrt(np.pi / 2), abs=1e-12)


@pytest.mark.parametrize("role", [0, 1, 2])
def test_discrete_solution_has_no_error(role, surface_family, rng):
    field = random_field(surface_family[role], rng)
    shell = geometry_catalog("cylinder-shell")
    errors = error_norms(field, discrete_reference(field), applicable_norms(2, role), shell)
    assert max(errors.values()) < 1e-12


@pytest.mark.parametrize("role", [0, 1, 2, 3])
def test_discrete_solution_has_no_error_3d(role, family_3d, rng):
    field = random_field(family_3d[role], rng)
    cube = geometry_catalog("distorted-cube")
    errors = error_norms(field, discrete_reference(field), applicable_norms(3, role), cube)
    assert max(errors.values()) < 1e-11


def test_h1_combines_value_and_gradient(surface_family):
    shell = geometry_catalog("cylinder-shell")
    exact = reference_function(get_solution("wave"), shell, 0)
    field = interpolate(surface_family, 0, exact.values)
    errors = error_norms(field, exact, ["L2", "H1semi", "H1"], shell)
    assert errors["H1"] == pytest.approx(np.hypot(errors["L2"], errors["H1semi"]), rel=1e-12)
    assert errors["H1semi"] > errors["L2"] > 0


def test_norm_checks(surface_family):
    zero = CoefficientField.zeros(surface_family[0])
    with pytest.raises(SpaceMismatchError):
        error_norm(zero, one, "Hdiv")
    with pytest.raises(SpaceMismatchError):
        error_norm(zero, one, "H1semi")
    with pytest.raises(SpaceMismatchError):
        error_norm(zero, one, "L2", geometry_catalog("unit-cube"))


def test_error_report(surface_family):
    report = error_report(CoefficientField.zeros(surface_family[0]), one, ["L2"])
    assert report.role == 0
    assert report.errors["L2"] == pytest.approx(1.0)


def test_projection_of_a_constant(surface_family):
    projected = l2_project(surface_family[0], one, geometry_catalog("cylinder-shell"))
    np.testing.assert_allclose(projected.flat(), 1.0, atol=1e-12)


@pytest.mark.parametrize("role", [0, 1, 2])
def test_projection_reproduces_discrete_fields(role, surface_family, rng):
    field = random_field(surface_family[role], rng)
    projected = l2_project(surface_family[role], field, geometry_catalog("quarter-annulus-nurbs"))
    np.testing.assert_allclose(projected.flat(), field.flat(), atol=1e-9)


def test_gram_matrix_is_symmetric(surface_family):
    gram, rhs = l2_system(surface_family[1], [one, one], geometry_catalog("cylinder-shell"))
    np.testing.assert_allclose(gram, gram.T, atol=1e-14)
    assert gram.shape == (surface_family[1].dimension,) * 2 == (rhs.size,) * 2


@pytest.mark.parametrize("role", [0, 1, 2])
def test_gram_matrix_is_positive_definite(role, surface_family):
    f = [one, one] if role == 1 else one
    gram, _ = l2_system(surface_family[role], f, geometry_catalog("quarter-annulus-nurbs"))
    assert np.linalg.eigvalsh(gram).min() > 0
    np.linalg.cholesky(gram)
    geom = geometry_catalog("two-squares")
    space = build_global_space(geom, role, PatchDiscretisation.uniform(2, 2))
    gram, _ = l2_system(space, f)
    assert np.linalg.eigvalsh(gram).min() > 0


@pytest.mark.parametrize("role", [0, 1, 2])
def test_projection_error_is_orthogonal_to_the_space(role, surface_family):
    annulus = geometry_catalog("quarter-annulus-nurbs")
    exact = reference_function(get_solution("wave"), annulus, role)
    gram, rhs = l2_system(surface_family[role], exact.values, annulus)
    projected = l2_project(surface_family[role], exact.values, annulus)
    # entry j is <f - Pf, b_j> in the physical inner product
    residual = rhs - gram @ projected.flat()
    assert np.max(np.abs(residual)) < 1e-10


@pytest.mark.parametrize("role", [0, 1, 2])
def test_physical_and_reference_norms_are_equivalent(role, surface_family, rng):
    annulus = geometry_catalog("quarter-annulus-nurbs")
    field = random_field(surface_family[role], rng)
    exact = reference_function(get_solution("wave"), annulus, role)
    physical = error_norm(field, exact, "L2", annulus)
    reference = error_norm(field, exact, "L2")

    t = np.linspace(0.0, 1.0, 101)
    grid = np.meshgrid(t, t, indexing="ij")
    kappa = surface_measure(annulus, *grid)
    if role == 0:
        low, high = kappa.min(), kappa.max()
    elif role == 2:
        low, high = 1.0 / kappa.max(), 1.0 / kappa.min()
    else:
        G = first_fundamental_form(annulus, *grid) / kappa
        eig = np.linalg.eigvalsh(np.moveaxis(G, (0, 1), (-2, -1)))
        low, high = eig.min(), eig.max()
    assert np.sqrt(low) * (1 - 1e-3) * reference <= physical <= np.sqrt(high) * (1 + 1e-3) * reference


def test_singular_gram_matrix(surface_family, monkeypatch):
    def failing(*args, **kwargs):
        raise scipy.linalg.LinAlgError("not positive definite")

    monkeypatch.setattr(scipy.linalg, "cho_factor", failing)
    with pytest.raises(SingularGramError):
        l2_project(surface_family[0], one)


@pytest.mark.parametrize("role", [0, 1, 2])
def test_projection_beats_the_interpolant(role):
    geom = geometry_catalog("two-squares")
    space = build_global_space(geom, role, PatchDiscretisation.uniform(2, 2))
    exact = [reference_function(get_solution("wave"), p, role) for p in geom.patches]
    interpolant = global_interpolant(space, [e.values for e in exact])
    projection = l2_project(space, [e.values for e in exact])
    e_int = error_norm(interpolant, exact, "L2")
    e_proj = error_norm(projection, exact, "L2")
    assert e_proj <= e_int * (1 + 1e-9)
    assert e_proj > 0


def test_global_norms_need_one_exact_per_patch():
    geom = geometry_catalog("two-squares")
    space = build_global_space(geom, 0, PatchDiscretisation.uniform(2, 1))
    field = global_interpolant(space, one)
    assert error_norm(field, one, "L2") == pytest.approx(0.0, abs=1e-13)
    with pytest.raises(SpaceMismatchError):
        error_norms(field, [one], ["L2"])
