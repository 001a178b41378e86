# schemas/field_schema.py
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from splinecomplex.complex import CoefficientField, ComplexSpace
from splinecomplex.errors import SpaceMismatchError
from splinecomplex.multipatch import GlobalField, GlobalSpace


class CoefficientFieldSchema(BaseModel):
    space: ComplexSpace
    components: List[List[float]] = Field(..., description="one flat C-ordered list per component")

    model_config = ConfigDict(frozen=True)

    @classmethod
    def from_field(cls, field: CoefficientField) -> "CoefficientFieldSchema":
        return cls(space=field.space, components=[c.ravel().tolist() for c in field.components])

    def to_field(self) -> CoefficientField:
        shapes = self.space.shapes
        if len(self.components) != len(shapes):
            raise SpaceMismatchError(f"expected {len(shapes)} components, got {len(self.components)}")
        comps = []
        for values, shape in zip(self.components, shapes):
            if len(values) != int(np.prod(shape)):
                raise SpaceMismatchError(f"component of shape {shape} needs {int(np.prod(shape))} values")
            comps.append(np.asarray(values, dtype=float).reshape(shape))
        return CoefficientField(self.space, tuple(comps))


class GlobalFieldSchema(BaseModel):
    role: int
    spaces: List[ComplexSpace] = Field(..., description="local space of every patch")
    coefficients: List[float]
    dof_map: List[int] = Field(..., description="global index of every local coefficient")
    signs: List[int]

    @classmethod
    def from_field(cls, field: GlobalField) -> "GlobalFieldSchema":
        space = field.space
        return cls(
            role=space.role,
            spaces=list(space.local_spaces),
            coefficients=field.coefficients.tolist(),
            dof_map=space.dof_map.tolist(),
            signs=space.signs.tolist(),
        )

    def to_field(self, space: GlobalSpace) -> GlobalField:
        """Rebuild on ``space``, which must number its unknowns the same way."""
        if space.role != self.role or list(space.local_spaces) != self.spaces:
            raise SpaceMismatchError("stored field was built on different local spaces")
        if space.dof_map.tolist() != self.dof_map or space.signs.tolist() != self.signs:
            raise SpaceMismatchError("stored field uses a different interface numbering")
        return GlobalField(space, np.asarray(self.coefficients, dtype=float))

    def patch_fields(self) -> List[CoefficientField]:
        local = np.asarray(self.signs) * np.asarray(self.coefficients, dtype=float)[np.asarray(self.dof_map)]
        out, start = [], 0
        for space in self.spaces:
            n = space.dimension
            out.append(CoefficientField.from_flat(space, local[start:start + n]))
            start += n
        return out
