# File: app/schemas/recurrence.py

from typing import List

from pydantic import BaseModel, Field, model_validator

from app.schemas.common import NUMERIC_MODEL_CONFIG, Real


class RecurrenceRow(BaseModel):
    """
    Degree-n record of the orthonormal family.
    coeffs[k] is a_{n,k}, the coefficient of x^k, so coeffs[n] = a_n and coeffs[n-1] = b_n.
    """
    n: int = Field(..., ge=0, example=1)
    a_n: Real = Field(..., description="Leading coefficient, sign (-1)^n.")
    b_n: Real = Field(..., description="Coefficient of x^(n-1); 0 for n = 0.")
    A_n: Real = Field(..., description="Off-diagonal recurrence coefficient, A_0 = 0.")
    B_n: Real = Field(..., description="Diagonal recurrence coefficient.")
    coeffs: List[Real] = Field(..., description="a_{n,0..n}")

    model_config = NUMERIC_MODEL_CONFIG

    @model_validator(mode="after")
    def _check_row(self) -> "RecurrenceRow":
        if len(self.coeffs) != self.n + 1:
            raise ValueError(f"row {self.n} must carry {self.n + 1} coefficients")
        if self.coeffs[self.n] != self.a_n:
            raise ValueError("coeffs[n] must equal a_n")
        if self.n >= 1 and self.coeffs[self.n - 1] != self.b_n:
            raise ValueError("coeffs[n-1] must equal b_n")
        if self.n == 0 and (self.b_n != 0 or self.A_n != 0):
            raise ValueError("b_0 and A_0 are defined as 0")
        return self


class RecurrenceTable(BaseModel):
    """
    Recurrence data of P_n^nu(x, t) for n <= n_max at fixed (nu, t).

    A_next holds A_{n_max+1}, which the Cholesky reduction yields for free and
    which the degree-(n_max+1) identities need.
    """
    nu: Real = Field(..., example="-0.5")
    t: Real = Field(..., example="1")
    n_max: int = Field(..., ge=0, example=1)
    rows: List[RecurrenceRow]
    A_next: Real = Field(..., description="A_{n_max+1}")
    bits: int = Field(..., ge=64, description="Working precision of the build.")
    achieved_bits: int = Field(..., ge=64, description="Precision at which the elimination stabilised.")

    model_config = NUMERIC_MODEL_CONFIG

    @model_validator(mode="after")
    def _check_rows(self) -> "RecurrenceTable":
        if len(self.rows) != self.n_max + 1:
            raise ValueError("rows must cover n = 0..n_max")
        if any(row.n != n for n, row in enumerate(self.rows)):
            raise ValueError("rows must be ordered by degree")
        return self

    # Accessors in the notation of the recurrence xP_n = A_{n+1}P_{n+1} + B_nP_n + A_nP_{n-1}.
    def a(self, n: int):
        return self.rows[n].a_n

    def b(self, n: int):
        return self.rows[n].b_n

    def A(self, n: int):
        if n == self.n_max + 1:
            return self.A_next
        return self.rows[n].A_n

    def B(self, n: int):
        return self.rows[n].B_n

    def coeffs(self, n: int):
        return self.rows[n].coeffs

    def free_term(self, n: int):
        return self.rows[n].coeffs[0]

    def b_over_a(self, n: int):
        return self.rows[n].b_n / self.rows[n].a_n

    def S(self, n: int):
        """A_n^2 + b_n/a_n."""
        return self.A(n) ** 2 + self.b_over_a(n)

    def E(self, n: int):
        """B_n - nu - 1 - 2n."""
        return self.B(n) - self.nu - 1 - 2 * n
