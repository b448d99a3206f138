# File: app/schemas/hankel.py

from pydantic import BaseModel, Field, model_validator

from app.schemas.common import NUMERIC_MODEL_CONFIG, Real


class HankelValue(BaseModel):
    """G_n^nu(t), the (n+1)-square moment Hankel determinant (G_{-1} = 1)."""
    nu: Real = Field(..., example="-0.5")
    t: Real = Field(..., example="1")
    n: int = Field(..., ge=-1, example=1)
    value: Real = Field(..., description="Determinant value, positive.")
    achieved_bits: int = Field(..., ge=64)

    model_config = NUMERIC_MODEL_CONFIG

    @model_validator(mode="after")
    def _positive(self) -> "HankelValue":
        if not self.value > 0:
            raise ValueError("a moment Hankel determinant of a positive weight is positive")
        return self


class HPair(BaseModel):
    """H_{i,j}^{nu,n}(t) of the double determinant family."""
    i: int = Field(..., example=1)
    j: int = Field(..., example=2)
    nu: Real = Field(..., example="-0.5")
    n: int = Field(..., ge=1, example=2)
    t: Real = Field(..., example="1")
    value: Real

    model_config = NUMERIC_MODEL_CONFIG
