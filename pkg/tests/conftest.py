import numpy as np
import pytest

from splinecomplex.complex import build_complex
from splinecomplex.knots import KnotVector, make_knots


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def hat_knots():
    # p = 1 on {0, 0, 0.5, 1, 1}
    return KnotVector(degree=1, knots=(0.0, 0.0, 0.5, 1.0, 1.0))


@pytest.fixture
def family_2d():
    return build_complex(2, (2, 2), [make_knots(2, 3), make_knots(2, 2)])


@pytest.fixture
def family_3d():
    return build_complex(3, (2, 1, 2), [make_knots(2, 2), make_knots(1, 3), make_knots(2, 1)])

