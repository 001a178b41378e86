"""Manufactured solutions and their reference representations per role.

A scalar solution lives in physical space. ``reference_function`` turns it
into role-k data on a patch: the pulled-back scalar for role 0, a curl (2D)
or gradient (3D) plus a boundary bubble for role 1, bubble-weighted fluxes
for 3D role 2 and the measure-weighted density on the top role. The bubble
parts vanish on the patch sides that carry the trace, so the data stays
conforming across interfaces while its divergence (or curl) is non-zero.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from splinecomplex.complex import CoefficientField, differential, grad_2d, grad_3d
from splinecomplex.errors import ConfigError
from splinecomplex.geometry import PatchMap, measure

logger = logging.getLogger(__name__)

PI = np.pi


@dataclass(frozen=True)
class ManufacturedSolution:
    name: str
    value: Callable
    gradient: Callable
    smooth: bool = True


@dataclass(frozen=True)
class ReferenceFunction:
    """Role-k reference data on one patch.

    ``derivative`` is the image under the complex operator leaving the role
    (None on the top role); ``gradient`` is only set for role 0.
    """
    role: int
    n_components: int
    values: Callable
    derivative: Optional[Callable] = None
    gradient: Optional[Callable] = None

    def __call__(self, *x):
        return self.values(*x)


def _sine_product():
    def value(x, y, z):
        return np.sin(PI * x) * np.sin(PI * y) * np.cos(PI * z / 2)

    def gradient(x, y, z):
        sx, sy, cz = np.sin(PI * x), np.sin(PI * y), np.cos(PI * z / 2)
        return (
            PI * np.cos(PI * x) * sy * cz,
            PI * sx * np.cos(PI * y) * cz,
            -0.5 * PI * sx * sy * np.sin(PI * z / 2),
        )

    return ManufacturedSolution("sine-product", value, gradient)


def _wave():
    def value(x, y, z):
        return np.sin(2 * PI * x + PI * y) * np.cos(PI * z)

    def gradient(x, y, z):
        a = 2 * PI * x + PI * y
        c = np.cos(a) * np.cos(PI * z)
        return 2 * PI * c, PI * c, -PI * np.sin(a) * np.sin(PI * z)

    return ManufacturedSolution("wave", value, gradient)


def _trilinear():
    def value(x, y, z):
        return 1 + x + 2 * y + 3 * z + x * y - y * z + x * y * z

    def gradient(x, y, z):
        return 1 + y + y * z, 2 + x - z + x * z, 3 - y + x * y

    return ManufacturedSolution("trilinear", value, gradient)


def _rough(alpha: float = 1.5):
    def value(x, y, z):
        return np.abs(x - 0.5) ** alpha * (1 + y) + 0 * z

    def gradient(x, y, z):
        r = x - 0.5
        return (
            alpha * np.abs(r) ** (alpha - 1) * np.sign(r) * (1 + y) + 0 * z,
            np.abs(r) ** alpha + 0 * z,
            0 * (x + y + z),
        )

    return ManufacturedSolution("rough", value, gradient, smooth=False)


def _constant():
    def value(x, y, z):
        return np.ones(np.broadcast(x, y, z).shape)

    def gradient(x, y, z):
        zero = np.zeros(np.broadcast(x, y, z).shape)
        return zero, zero, zero

    return ManufacturedSolution("constant", value, gradient)


def _random(seed: int, n_modes: int = 3):
    rng = np.random.default_rng(seed)
    amplitudes = rng.uniform(-1.0, 1.0, n_modes)
    frequencies = PI * rng.uniform(-2.0, 2.0, (n_modes, 3))
    phases = rng.uniform(0.0, 2 * PI, n_modes)

    def value(x, y, z):
        return sum(
            a * np.sin(w[0] * x + w[1] * y + w[2] * z + phi)
            for a, w, phi in zip(amplitudes, frequencies, phases)
        )

    def gradient(x, y, z):
        parts = [
            (a * np.cos(w[0] * x + w[1] * y + w[2] * z + phi), w)
            for a, w, phi in zip(amplitudes, frequencies, phases)
        ]
        return tuple(sum(c * w[i] for c, w in parts) for i in range(3))

    return ManufacturedSolution(f"random-{seed}", value, gradient)


SOLUTIONS: Dict[str, Callable[[], ManufacturedSolution]] = {
    "sine-product": _sine_product,
    "wave": _wave,
    "trilinear": _trilinear,
    "rough": _rough,
    "constant": _constant,
}


def get_solution(name: str, seed: int = 0) -> ManufacturedSolution:
    if name == "random":
        return _random(seed)
    try:
        return SOLUTIONS[name]()
    except KeyError:
        known = ", ".join(sorted(list(SOLUTIONS) + ["random", "discrete"]))
        raise ConfigError(f"unknown manufactured solution {name!r}; known: {known}") from None


def _pulled(solution: ManufacturedSolution, patch: PatchMap, x):
    X = patch.evaluate(*x)
    J = patch.jacobian(*x)
    f = np.asarray(solution.value(*X), dtype=float)
    g = solution.gradient(*X)
    grad = [sum(J[i, a] * g[i] for i in range(3)) for a in range(patch.dim)]
    return f, grad


def _sines(x):
    return [np.sin(PI * np.asarray(c, dtype=float)) for c in x]


def _bubble(c: int, s: List[np.ndarray]):
    out = 1.0
    for a, v in enumerate(s):
        if a != c:
            out = out * v
    return out


def _bubble_derivative(c: int, b: int, x, s):
    """``d_b`` of the bubble of component ``c``."""
    if b == c:
        return 0.0
    out = PI * np.cos(PI * np.asarray(x[b], dtype=float))
    for a, v in enumerate(s):
        if a not in (b, c):
            out = out * v
    return out


def reference_function(solution: ManufacturedSolution, patch: PatchMap, role: int) -> ReferenceFunction:
    d = patch.dim
    if not 0 <= role <= d:
        raise ConfigError(f"role {role} out of range for a {d}D patch")

    if role == 0:
        def values(*x):
            return _pulled(solution, patch, x)[0]

        def gradient(*x):
            return _pulled(solution, patch, x)[1]

        def derivative(*x):
            grad = _pulled(solution, patch, x)[1]
            return [grad[1], -grad[0]] if d == 2 else grad

        return ReferenceFunction(role, 1, values, derivative, gradient)

    if role == d:
        def density(*x):
            return measure(patch, *x) * _pulled(solution, patch, x)[0]

        return ReferenceFunction(role, 1, density)

    if d == 2:
        def flux(*x):
            f, (fu, fv) = _pulled(solution, patch, x)
            su, sv = _sines(x)
            return [fv + su * f, -fu + sv * f]

        def divergence(*x):
            f, (fu, fv) = _pulled(solution, patch, x)
            su, sv = _sines(x)
            cu, cv = PI * np.cos(PI * np.asarray(x[0])), PI * np.cos(PI * np.asarray(x[1]))
            return cu * f + su * fu + cv * f + sv * fv

        return ReferenceFunction(role, 2, flux, divergence)

    if role == 1:
        def field(*x):
            f, grad = _pulled(solution, patch, x)
            s = _sines(x)
            return [grad[c] + _bubble(c, s) * f for c in range(3)]

        def curl(*x):
            f, grad = _pulled(solution, patch, x)
            s = _sines(x)

            def dh(c, b):
                return _bubble_derivative(c, b, x, s) * f + _bubble(c, s) * grad[b]

            return [dh(2, 1) - dh(1, 2), dh(0, 2) - dh(2, 0), dh(1, 0) - dh(0, 1)]

        return ReferenceFunction(role, 3, field, curl)

    def flux3(*x):
        f = _pulled(solution, patch, x)[0]
        return [v * f for v in _sines(x)]

    def divergence3(*x):
        f, grad = _pulled(solution, patch, x)
        s = _sines(x)
        return sum(PI * np.cos(PI * np.asarray(x[c])) * f + s[c] * grad[c] for c in range(3))

    return ReferenceFunction(role, 3, flux3, divergence3)


def discrete_reference(field: CoefficientField) -> ReferenceFunction:
    """Reference data represented by a discrete field."""
    space = field.space
    n = space.n_components

    def values(*x):
        v = field(*x)
        return v[0] if n == 1 else list(v)

    derivative = None
    if space.role < space.dim:
        image = differential(field)

        def derivative(*x):
            v = image(*x)
            return v[0] if image.space.n_components == 1 else list(v)

    gradient = None
    if space.role == 0:
        grad = grad_2d(field) if space.dim == 2 else grad_3d(field)

        def gradient(*x):
            return list(grad(*x))

    return ReferenceFunction(space.role, n, values, derivative, gradient)
