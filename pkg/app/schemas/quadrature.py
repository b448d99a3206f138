# File: app/schemas/quadrature.py

from typing import List

from pydantic import BaseModel, Field, model_validator

from app.schemas.common import NUMERIC_MODEL_CONFIG, Real


class QuadratureRule(BaseModel):
    """m-point Gauss rule for x^nu exp(-x - t/x) on (0, inf)."""
    nu: Real = Field(..., example="-0.5")
    t: Real = Field(..., example="1")
    m: int = Field(..., gt=0, example=2)
    nodes: List[Real] = Field(..., description="Zeros of P_m, increasing.")
    weights: List[Real] = Field(..., description="Christoffel numbers, positive.")

    model_config = NUMERIC_MODEL_CONFIG

    @model_validator(mode="after")
    def _check_rule(self) -> "QuadratureRule":
        if len(self.nodes) != self.m or len(self.weights) != self.m:
            raise ValueError("a rule of m points needs m nodes and m weights")
        if any(not x > 0 for x in self.nodes):
            raise ValueError("nodes must lie in (0, inf)")
        if any(not b > a for a, b in zip(self.nodes, self.nodes[1:])):
            raise ValueError("nodes must be strictly increasing")
        if any(not w > 0 for w in self.weights):
            raise ValueError("weights must be positive")
        return self
