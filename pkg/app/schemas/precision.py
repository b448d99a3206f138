# File: app/schemas/precision.py

import math

from mpmath import mp
from pydantic import BaseModel, Field, model_validator

from app.schemas.common import NUMERIC_MODEL_CONFIG, Real

# Decimal digits carried per bit.
LOG10_2 = 0.30103
GUARD_DIGITS = 10


def digits_for_bits(bits: int) -> int:
    """Largest target_digits admissible at `bits` (guard digits reserved)."""
    return int(math.floor(bits * LOG10_2)) - GUARD_DIGITS


class PrecisionContext(BaseModel):
    """
    Working precision for one computation.

    bits is the binary precision every service enters with mp.workprec;
    target_digits is what callers ask to be correct. Contexts are immutable,
    derive variants with with_bits / with_digits.
    """
    bits: int = Field(..., ge=64, example=196, description="Binary working precision.")
    target_digits: int = Field(..., gt=0, example=30, description="Requested correct decimal digits.")
    quad_step: float = Field(0.5, gt=0, example=0.5, description="Initial trapezoid step on the u-line.")
    quad_halvings_max: int = Field(10, gt=0, example=10, description="Maximum number of step halvings.")
    fd_step_scale: Real = Field(..., description="Relative step for first-order central differences.")

    model_config = {**NUMERIC_MODEL_CONFIG, "frozen": True}

    @model_validator(mode="after")
    def _check_guard_digits(self) -> "PrecisionContext":
        if self.target_digits > digits_for_bits(self.bits):
            raise ValueError(
                f"target_digits={self.target_digits} needs more than {self.bits} bits "
                f"(at most {digits_for_bits(self.bits)} digits with guard digits reserved)"
            )
        if self.fd_step_scale <= 0 or self.fd_step_scale >= 0.25:
            raise ValueError("fd_step_scale must lie in (0, 1/4)")
        return self

    @property
    def internal_digits(self) -> int:
        """Digits targeted by moment quadratures that feed ill-conditioned eliminations."""
        return max(self.target_digits, digits_for_bits(self.bits))

    @property
    def fd_step_scale_second(self):
        """Relative step for second-order differences, 10^(-D/4)."""
        with mp.workprec(self.bits):
            return mp.mpf(10) ** (-mp.mpf(self.target_digits) / 4)

    def with_bits(self, bits: int) -> "PrecisionContext":
        return PrecisionContext(**{**self.model_dump(), "bits": bits})

    def with_digits(self, target_digits: int) -> "PrecisionContext":
        return PrecisionContext(**{**self.model_dump(), "target_digits": target_digits})

    def internal(self) -> "PrecisionContext":
        """Same bits, quadrature target raised to internal_digits."""
        return self.with_digits(self.internal_digits)


class IntegralResult(BaseModel):
    """Outcome of one refined quadrature."""
    value: Real = Field(..., description="Integral at working precision.")
    error_estimate: Real = Field(..., description="|S_last - S_previous| of the refinement.")
    evaluations: int = Field(..., ge=0, example=321, description="Integrand evaluations spent.")

    model_config = NUMERIC_MODEL_CONFIG

    @model_validator(mode="after")
    def _nonnegative_error(self) -> "IntegralResult":
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be nonnegative")
        return self


class DerivativeCheck(BaseModel):
    """Exact t-derivative of rho against its central-difference estimate."""
    order: int = Field(..., ge=0)
    exact: Real
    estimate: Real
    residual: Real
    tolerance: Real
    passed: bool

    model_config = NUMERIC_MODEL_CONFIG
