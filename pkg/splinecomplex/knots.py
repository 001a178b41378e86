"""Open knot vectors and the combinatorial queries built on them."""
import logging
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, model_validator

from config import settings
from splinecomplex.errors import EvaluationDomainError, KnotVectorError

logger = logging.getLogger(__name__)


class Element(BaseModel):
    """A non-empty knot span ``[left, right]``.

    ``index`` counts non-empty spans from the left, ``knot_index`` is the
    position ``i`` of the span ``[xi_i, xi_{i+1}]`` in the knot sequence.
    """
    index: int
    knot_index: int
    left: float
    right: float

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_length(self):
        if not self.right > self.left:
            raise KnotVectorError(f"element [{self.left}, {self.right}] has no positive length")
        return self

    @property
    def length(self) -> float:
        return self.right - self.left


class KnotVector(BaseModel):
    """A p-open knot vector on [0, 1] together with its degree.

    Interior knots may repeat up to ``degree`` times (once for degree 0).
    Knot vectors obtained by truncation or refinement of a valid vector are
    validated with ``context={"derived": True}``, which accepts interior
    multiplicity ``degree + 1``: the derivative space of a C^0 spline is
    discontinuous at such knots.
    """
    degree: int = Field(..., ge=0)
    knots: Tuple[float, ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_open(self, info: ValidationInfo):
        p = self.degree
        t = np.asarray(self.knots, dtype=float)
        if t.size < 2 * (p + 1):
            raise KnotVectorError(
                f"{t.size} knots cannot carry degree {p}: need at least {2 * (p + 1)}"
            )
        if np.any(np.diff(t) < 0):
            raise KnotVectorError("knots must be non-decreasing")
        if t[0] != 0.0 or t[-1] != 1.0:
            raise KnotVectorError("knots must start at 0 and end at 1")
        if np.count_nonzero(t == 0.0) != p + 1 or np.count_nonzero(t == 1.0) != p + 1:
            raise KnotVectorError(f"knot vector is not {p}-open: end knots must repeat exactly {p + 1} times")

        derived = bool(info.context and info.context.get("derived"))
        limit = p + 1 if derived else max(p, 1)
        interior, counts = np.unique(t[p + 1:-(p + 1)], return_counts=True)
        if counts.size and counts.max() > limit:
            worst = interior[counts.argmax()]
            raise KnotVectorError(
                f"interior knot {worst} repeats {counts.max()} times, at most {limit} allowed"
            )
        return self

    @classmethod
    def derived(cls, degree: int, knots) -> "KnotVector":
        return cls.model_validate(
            {"degree": degree, "knots": tuple(float(x) for x in knots)},
            context={"derived": True},
        )

    def __str__(self):
        return f"<KnotVector p={self.degree} k={self.dimension} h={self.mesh_size:g}>"

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.knots, dtype=float)

    @property
    def dimension(self) -> int:
        """Number of basis functions, ``len(knots) - degree - 1``."""
        return len(self.knots) - self.degree - 1

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(self.array)

    @property
    def elements(self) -> List[Element]:
        t = self.array
        spans = np.nonzero(t[1:] > t[:-1])[0]
        return [
            Element(index=n, knot_index=int(i), left=float(t[i]), right=float(t[i + 1]))
            for n, i in enumerate(spans)
        ]

    @property
    def element_lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def mesh_size(self) -> float:
        return float(self.element_lengths.max())

    @property
    def max_support_extension(self) -> float:
        """The tilde-h companion of ``mesh_size``."""
        return max(b - a for a, b in (self.support_extension(el) for el in self.elements))

    def support(self, i: int) -> Tuple[float, float]:
        """Support ``[xi_i, xi_{i+p+1}]`` of the i-th basis function."""
        if not 0 <= i < self.dimension:
            raise KnotVectorError(f"basis index {i} out of range 0..{self.dimension - 1}")
        return self.knots[i], self.knots[i + self.degree + 1]

    def element(self, index: int) -> Element:
        elements = self.elements
        if not 0 <= index < len(elements):
            raise KnotVectorError(f"element index {index} out of range 0..{len(elements) - 1}")
        return elements[index]

    def support_extension(self, element: Union[Element, int]) -> Tuple[float, float]:
        """Union of the supports of all basis functions not vanishing on ``element``."""
        if isinstance(element, int):
            element = self.element(element)
        i = element.knot_index
        if not self.degree <= i < self.dimension or self.knots[i] != element.left:
            raise KnotVectorError(f"{element} is not an element of this knot vector")
        return self.knots[i - self.degree], self.knots[i + self.degree + 1]

    def is_locally_quasi_uniform(self, theta: Optional[float] = None) -> bool:
        theta = settings.QUASI_UNIFORMITY_THETA if theta is None else theta
        if theta < 1:
            raise KnotVectorError(f"quasi-uniformity constant must be >= 1, got {theta}")
        h = self.element_lengths
        ratios = h[1:] / h[:-1]
        slack = 1.0 + 1e-12
        return bool(np.all(ratios <= theta * slack) and np.all(ratios >= 1.0 / (theta * slack)))

    def truncate(self) -> "KnotVector":
        """Drop the first and last knot; the result carries degree ``p - 1``."""
        if self.degree == 0:
            raise KnotVectorError("cannot truncate a degree 0 knot vector")
        return KnotVector.derived(self.degree - 1, self.knots[1:-1])

    def refine_dyadic(self) -> "KnotVector":
        """Insert the midpoint of every non-empty element once."""
        b = self.breakpoints
        refined = np.sort(np.concatenate([self.array, 0.5 * (b[:-1] + b[1:])]))
        return KnotVector.derived(self.degree, refined)

    def reversed(self) -> "KnotVector":
        """The knot vector of the reflected parameter ``1 - x``."""
        return KnotVector.derived(self.degree, (1.0 - self.array)[::-1])

    def matches(self, other: "KnotVector", tol: Optional[float] = None) -> bool:
        tol = settings.KNOT_TOLERANCE if tol is None else tol
        if self.degree != other.degree or len(self.knots) != len(other.knots):
            return False
        return bool(np.max(np.abs(self.array - other.array)) <= tol)

    def find_spans(self, x) -> np.ndarray:
        """Span indices ``i`` with ``xi_i <= x < xi_{i+1}``; ``x = 1`` falls in the last span."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise EvaluationDomainError("evaluation points must lie in [0, 1]")
        spans = np.searchsorted(self.array, x, side="right") - 1
        return np.clip(spans, self.degree, self.dimension - 1)

    def greville(self) -> np.ndarray:
        p = self.degree
        if p == 0:
            return 0.5 * (self.array[1:] + self.array[:-1])
        g = np.convolve(self.array, np.ones(p) / p)[p:-p]
        return np.clip(g, 0.0, 1.0)


def make_knots(degree: int, n_elements: int, multiplicity: int = 1) -> KnotVector:
    """Uniform p-open knot vector with ``n_elements`` elements."""
    if n_elements < 1:
        raise KnotVectorError("need at least one element")
    interior = np.repeat(np.arange(1, n_elements) / n_elements, multiplicity)
    knots = np.concatenate([np.zeros(degree + 1), interior, np.ones(degree + 1)])
    return KnotVector(degree=degree, knots=tuple(knots))


def refine(kv: KnotVector, levels: int) -> KnotVector:
    for _ in range(levels):
        kv = kv.refine_dyadic()
    return kv
