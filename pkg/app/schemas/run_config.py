# File: app/schemas/run_config.py

from enum import Enum
from typing import List, Optional

from mpmath import mp
from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.config import settings


class Subcommand(str, Enum):
    RHO = "rho"
    COEFFS = "coeffs"
    QUAD = "quad"
    VERIFY = "verify"
    EXPAND = "expand"
    LIMIT = "limit"
    EVAL = "eval"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class RunConfig(BaseModel):
    """
    One invocation of a pipeline. nu, t and x stay decimal strings here and are
    parsed at working precision by the pipeline, so no binary float ever enters.
    """
    subcommand: Subcommand
    nu: str = Field(..., example="0.5")
    t: Optional[str] = Field(None, example="1")
    n_max: int = Field(6, ge=0, example=6)
    m: int = Field(1, gt=0, example=4)
    n: int = Field(0, ge=0, example=1)
    k_max: Optional[int] = Field(None, ge=0, example=25)
    x: Optional[str] = Field(None, example="1.5")
    digits: int = Field(settings.OPOLY_DEFAULT_DIGITS, ge=10, le=200, example=30)
    format: OutputFormat = OutputFormat.CSV
    out: Optional[str] = None
    suite: List[str] = Field(default_factory=lambda: ["all"])
    seed: int = Field(settings.OPOLY_DEFAULT_SEED, example=42)
    oracle: bool = False

    @field_validator("nu", "t", "x")
    @classmethod
    def _decimal(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        try:
            mp.mpf(value)
        except (ValueError, TypeError) as exc:
            raise ValueError(f"{value!r} is not a decimal number") from exc
        return value.strip()

    @model_validator(mode="after")
    def _check_t(self) -> "RunConfig":
        if self.subcommand is Subcommand.LIMIT:
            return self
        if self.t is None:
            raise ValueError(f"subcommand {self.subcommand.value} needs t")
        if not mp.mpf(self.t) > 0:
            raise ValueError("t must be positive")
        if self.n_max > settings.OPOLY_N_MAX_HARD:
            raise ValueError(f"n_max above the hard cap {settings.OPOLY_N_MAX_HARD}")
        return self
