# File: app/schemas/laguerre.py

from enum import Enum

from pydantic import BaseModel, Field

from app.schemas.common import NUMERIC_MODEL_CONFIG, Real


class LaguerreValue(BaseModel):
    """One value L_n^nu(x) of the classical Laguerre polynomial."""
    n: int = Field(..., ge=0, example=2)
    nu: Real = Field(..., example="0")
    x: Real = Field(..., example="1")
    value: Real = Field(..., example="-0.5")

    model_config = NUMERIC_MODEL_CONFIG


class LimitQuantity(str, Enum):
    """Recurrence quantities with a closed-form t = 0 limit."""
    A_LEAD = "a"
    B_SUB = "b"
    A_OFF = "A"
    B_DIAG = "B"
    FREE_TERM = "a0"
    A_LEAD_PRIME = "a_prime"
    B_SUB_PRIME = "b_prime"
    B_DIAG_PRIME = "B_prime"
    FREE_TERM_PRIME = "a0_prime"

    @property
    def is_derivative(self) -> bool:
        return self.value.endswith("_prime")
