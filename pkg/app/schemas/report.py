# File: app/schemas/report.py

from enum import Enum
from typing import Any, Dict, Iterable, List

from pydantic import BaseModel, Field, model_validator

from app.schemas.common import NUMERIC_MODEL_CONFIG, Real


class Method(str, Enum):
    ALGEBRAIC = "algebraic"
    QUADRATURE = "quadrature"
    FINITE_DIFFERENCE = "finite_difference"
    T_GRID_INTEGRAL = "t_grid_integral"


class ResidualEntry(BaseModel):
    """
    One checked identity at one degree.
    `passed` is derived from residual < tolerance when not supplied, and must
    agree with it when it is.
    """
    identity_id: str = Field(..., example="3.1")
    n: int = Field(..., ge=0, example=0)
    nu: Real = Field(..., example="-0.5")
    t: Real = Field(..., example="1")
    residual: Real = Field(..., description="Absolute residual of the dimensionless identity.")
    tolerance: Real = Field(..., description="Method-specific tolerance.")
    method: Method
    passed: bool = Field(False, serialization_alias="pass")

    model_config = NUMERIC_MODEL_CONFIG

    @model_validator(mode="before")
    @classmethod
    def _derive_pass(cls, data: Any) -> Any:
        if isinstance(data, dict) and "passed" not in data:
            residual, tolerance = data.get("residual"), data.get("tolerance")
            if residual is not None and tolerance is not None:
                data = {**data, "passed": bool(residual < tolerance)}
        return data

    @model_validator(mode="after")
    def _consistent(self) -> "ResidualEntry":
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.residual < 0:
            raise ValueError("residual must be nonnegative")
        if self.passed != bool(self.residual < self.tolerance):
            raise ValueError("pass must equal residual < tolerance")
        return self


class ResidualReport(BaseModel):
    entries: List[ResidualEntry] = Field(default_factory=list)
    errors: List[str] = Field(default_factory=list, description="Numerical failures of whole families, one line each.")

    model_config = NUMERIC_MODEL_CONFIG

    @classmethod
    def combine(cls, reports: Iterable["ResidualReport"]) -> "ResidualReport":
        merged: List[ResidualEntry] = []
        errors: List[str] = []
        for report in reports:
            merged.extend(report.entries)
            errors.extend(report.errors)
        return cls(entries=merged, errors=errors)

    @property
    def all_passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    def ids(self) -> List[str]:
        seen: Dict[str, None] = {}
        for entry in self.entries:
            seen.setdefault(entry.identity_id, None)
        return list(seen)

    def failures(self) -> List[ResidualEntry]:
        return [entry for entry in self.entries if not entry.passed]

    def for_id(self, identity_id: str) -> List[ResidualEntry]:
        return [entry for entry in self.entries if entry.identity_id == identity_id]

    def only(self, identity_ids: Iterable[str]) -> "ResidualReport":
        wanted = set(identity_ids)
        return ResidualReport(entries=[e for e in self.entries if e.identity_id in wanted], errors=list(self.errors))
