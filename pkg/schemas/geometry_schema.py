# schemas/geometry_schema.py
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from splinecomplex.knots import KnotVector

Side = Literal["xmin", "xmax", "ymin", "ymax", "zmin", "zmax"]


class InterfaceDescriptor(BaseModel):
    """Side ``side_a`` of patch ``patch_a`` glued to side ``side_b`` of ``patch_b``.

    ``reversed`` means the shared edge is traversed in opposite directions by
    the two side parametrisations (2D only).
    """
    patch_a: int = Field(..., ge=0)
    side_a: Side
    patch_b: int = Field(..., ge=0)
    side_b: Side
    orientation: Literal["same", "reversed"] = "same"

    model_config = ConfigDict(frozen=True)

    def __str__(self):
        return f"{self.patch_a}:{self.side_a} ~ {self.patch_b}:{self.side_b} ({self.orientation})"


class AffinePatchSchema(BaseModel):
    origin: Tuple[float, float, float]
    axes: List[List[float]] = Field(..., description="3 rows, one column per parametric axis")


class NurbsPatchSchema(BaseModel):
    knots: List[KnotVector]
    control_points: List = Field(..., description="nested lists of shape (*dims, 3)")
    weights: List = Field(..., description="nested lists of shape dims")


class PatchSchema(BaseModel):
    catalog: Optional[str] = None
    affine: Optional[AffinePatchSchema] = None
    nurbs: Optional[NurbsPatchSchema] = None

    @model_validator(mode="after")
    def check_one_source(self):
        given = [x for x in (self.catalog, self.affine, self.nurbs) if x is not None]
        if len(given) != 1:
            raise ValueError("a patch is given by exactly one of catalog, affine or nurbs")
        return self


class DiscretisationSchema(BaseModel):
    degrees: List[int] = Field(default_factory=lambda: [2], description="one entry, or one per axis")
    elements: int = Field(2, ge=1)
    levels: int = Field(0, ge=0)
    patch_refinements: Dict[int, int] = Field(default_factory=dict)
    knots: Optional[List[KnotVector]] = None


class GeometryFileSchema(BaseModel):
    catalog: Optional[str] = None
    patches: Optional[List[PatchSchema]] = None
    interfaces: Optional[List[InterfaceDescriptor]] = None
    discretisation: DiscretisationSchema = Field(default_factory=DiscretisationSchema)

    @model_validator(mode="after")
    def check_source(self):
        if (self.catalog is None) == (self.patches is None):
            raise ValueError("give either a catalog name or a list of patches")
        return self
