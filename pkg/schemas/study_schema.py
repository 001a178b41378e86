# schemas/study_schema.py
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from schemas.report_schema import NormTag
from splinecomplex.knots import KnotVector

Projector = Literal["tilde-interpolant", "plain-interpolant", "l2-projection"]


class StudyConfig(BaseModel):
    name: str = Field(..., min_length=1)
    geometry: str = "flat-square"
    role: int = Field(..., ge=0, le=3)
    degrees: List[int] = Field(..., min_length=1, max_length=3)
    initial_elements: int = Field(2, ge=1)
    initial_knots: Optional[List[KnotVector]] = Field(
        None, description="explicit starting knots per axis, overriding degrees/initial_elements"
    )
    levels: int = Field(4, description="number of refinement levels, at least 3")
    solution: str = "sine-product"
    norms: List[NormTag] = Field(default_factory=lambda: ["L2"])
    projector: Projector = "tilde-interpolant"
    patch_refinements: Dict[int, int] = Field(default_factory=dict)
    seed: Optional[int] = None

    @field_validator("levels")
    @classmethod
    def check_levels(cls, v: int) -> int:
        if v < 3:
            raise ValueError("a study needs at least 3 levels to estimate two rates")
        return v

    @field_validator("degrees")
    @classmethod
    def check_degrees(cls, v: List[int]) -> List[int]:
        if any(p < 1 for p in v):
            raise ValueError("degrees must be >= 1")
        return v


class ConvergenceRecord(BaseModel):
    level: int
    h: float
    errors: Dict[NormTag, float]
    commuting_residual: Optional[float] = None
    reference_errors: Optional[Dict[NormTag, float]] = Field(
        None, description="tilde-interpolant errors on the same level, recorded by projection studies"
    )


class NormSummary(BaseModel):
    expected_order: Optional[float]
    rates: List[Optional[float]]
    final_rate: Optional[float]
    status: Literal["pass", "fail", "exact", "not-asserted"]


class StudySummary(BaseModel):
    name: str
    seed: int
    config: StudyConfig
    records: List[ConvergenceRecord]
    norms: Dict[NormTag, NormSummary]
    max_commuting_residual: Optional[float] = None
    passed: bool
