# File: app/schemas/output.py

"""
Output documents of the pipelines. Every real is already a decimal string here,
formatted to the requested significant digits, so JSON and CSV renderings agree.
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class CoeffRowOut(BaseModel):
    n: int = Field(..., example=1)
    a_n: str = Field(..., example="-2.04170")
    b_n: str = Field(..., example="3.06255")
    A_n: str = Field(..., example="-1")
    B_n: str = Field(..., example="2.5")
    coeffs: List[str] = Field(..., description="a_{n,0}..a_{n,n}")


class CoeffsDocument(BaseModel):
    nu: str = Field(..., example="-0.5")
    t: str = Field(..., example="1")
    n_max: int = Field(..., example=1)
    precision_bits: int = Field(..., example=196)
    rows: List[CoeffRowOut]


class QuadDocument(BaseModel):
    nu: str
    t: str
    m: int
    nodes: List[str]
    weights: List[str]


class ReportRowOut(BaseModel):
    identity_id: str = Field(..., example="3.1")
    n: int
    nu: str
    t: str
    residual: str
    tolerance: str
    method: str
    passed: bool = Field(..., serialization_alias="pass")

    model_config = ConfigDict(populate_by_name=True)


class ReportDocument(BaseModel):
    nu: str
    t: str
    n_max: int
    all_passed: bool
    rows: List[ReportRowOut]
    errors: List[str] = Field(default_factory=list)


class ExpandRowOut(BaseModel):
    k: int
    d: str = Field(..., description="d_{n,k}(t)")
    bound: str = Field(..., description="k! h_n / Gamma(k+nu+1)")


class ExpandDocument(BaseModel):
    nu: str
    t: str
    n: int
    k_max: int
    h_bound: str
    rows: List[ExpandRowOut]


class LimitRowOut(BaseModel):
    n: int
    quantity: str
    limit: str
    computed: str
    difference: str


class LimitDocument(BaseModel):
    nu: str
    t: str = Field(..., description="The small t at which values were computed.")
    rows: List[LimitRowOut]


class ValueDocument(BaseModel):
    """A single value (rho, P_n) with an optional determinant oracle."""
    value: str
    oracle: Optional[str] = None
    difference: Optional[str] = None
