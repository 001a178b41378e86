import numpy as np

from splinecomplex.knots import KnotVector


def random_knots(degree: int, n_interior: int, rng: np.random.Generator) -> KnotVector:
    """Open knot vector with distinct dyadic interior knots."""
    interior = np.sort(rng.choice(np.arange(1, 16) / 16, size=n_interior, replace=False))
    return KnotVector(
        degree=degree, knots=(0.0,) * (degree + 1) + tuple(interior) + (1.0,) * (degree + 1)
    )
