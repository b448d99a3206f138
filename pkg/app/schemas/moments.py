# File: app/schemas/moments.py

from typing import List

from pydantic import BaseModel, Field, model_validator

from app.schemas.common import NUMERIC_MODEL_CONFIG, Real


class MomentTable(BaseModel):
    """
    rho_{nu+k}(t) for k_min <= k <= k_max at one (nu, t).
    values[i] holds index k = k_min + i; use rho(k) to read by index.
    """
    nu: Real = Field(..., example="-0.5")
    t: Real = Field(..., example="1")
    k_min: int = Field(..., example=1)
    k_max: int = Field(..., example=3)
    values: List[Real] = Field(..., description="rho_{nu+k}(t) for k = k_min..k_max")

    model_config = NUMERIC_MODEL_CONFIG

    @model_validator(mode="after")
    def _check_shape(self) -> "MomentTable":
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        if len(self.values) != self.k_max - self.k_min + 1:
            raise ValueError("values length does not match the index range")
        if self.t <= 0:
            raise ValueError("t must be positive")
        if any(not v > 0 for v in self.values):
            raise ValueError("moments of a positive weight must be positive")
        return self

    def rho(self, k: int):
        if not self.k_min <= k <= self.k_max:
            raise IndexError(f"moment index {k} outside [{self.k_min}, {self.k_max}]")
        return self.values[k - self.k_min]
