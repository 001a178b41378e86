# schemas/report_schema.py
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, computed_field

from schemas.geometry_schema import InterfaceDescriptor

NormTag = Literal["L2", "H1semi", "H1", "Hdiv", "Hcurl"]


class ErrorReport(BaseModel):
    role: int
    errors: Dict[NormTag, float]


class InterfaceReport(BaseModel):
    interface: InterfaceDescriptor
    parametrisation_match: bool
    max_deviation: float
    knot_match: bool
    degree_match: bool
    orientation: Optional[Literal["same", "reversed"]] = Field(
        None, description="orientation inferred from sampling, None if neither matches"
    )

    @computed_field
    @property
    def passed(self) -> bool:
        return self.parametrisation_match and self.knot_match and self.degree_match


class ConformityReport(BaseModel):
    interfaces: List[InterfaceReport]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.interfaces)

    def failures(self) -> List[InterfaceReport]:
        return [r for r in self.interfaces if not r.passed]


class JumpReport(BaseModel):
    interface: InterfaceDescriptor
    role: int
    jump: Optional[float] = Field(None, description="None where the role carries no trace")


class ResidualReport(BaseModel):
    geometry: str
    degrees: List[int]
    residuals: Dict[str, float] = Field(..., description="role pair 'k->k+1' to max coefficient residual")
