# File: app/schemas/expansion.py

from typing import List

from pydantic import BaseModel, Field, model_validator

from app.schemas.common import NUMERIC_MODEL_CONFIG, Real


class ExpansionCoeffs(BaseModel):
    """
    Laguerre-expansion coefficients of exp(-t/x) P_n(x, t):
    d[k] = d_{n,k}^nu(t) for k = 0..k_max, with h_bound the coefficient bound constant h_n^nu(t).
    """
    nu: Real = Field(..., example="2")
    t: Real = Field(..., example="1")
    n: int = Field(..., ge=0, example=1)
    k_max: int = Field(..., ge=0, example=25)
    d: List[Real]
    h_bound: Real

    model_config = NUMERIC_MODEL_CONFIG

    @model_validator(mode="after")
    def _check(self) -> "ExpansionCoeffs":
        if not self.nu > -1:
            raise ValueError("expansion coefficients need nu > -1")
        if len(self.d) != self.k_max + 1:
            raise ValueError("d must hold k = 0..k_max")
        if not self.h_bound > 0:
            raise ValueError("h_bound must be positive")
        return self


class TruncationResult(BaseModel):
    """Worst error of the truncated Laguerre series over K..2K-1 and over 2K..4K-1 terms."""
    n: int = Field(..., ge=0)
    K: int = Field(..., gt=0)
    sup_error_K: Real
    sup_error_2K: Real

    model_config = NUMERIC_MODEL_CONFIG

    @property
    def decreased(self) -> bool:
        return bool(self.sup_error_2K < self.sup_error_K)


class GeneratingPartial(BaseModel):
    """Partial sum of sum_n P_n(x, t) w^n / n! and the exact L2 tail bound."""
    value: Real
    tail_norm: Real
    N: int = Field(..., ge=0)

    model_config = NUMERIC_MODEL_CONFIG
