# File: app/services/quadrature.py

import logging
from typing import Callable, List, Optional, Sequence

from mpmath import mp, mpf

from app.core.errors import DomainError
from app.schemas.precision import PrecisionContext
from app.schemas.quadrature import QuadratureRule
from app.schemas.recurrence import RecurrenceTable
from app.services.linalg import tridiagonal_eigen
from app.services.recurrence import evaluate_all

logger = logging.getLogger(__name__)


def jacobi_rule(diag: Sequence[mpf], off: Sequence[mpf], mass: mpf) -> List[List[mpf]]:
    """Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights mass * v_0^2."""
    values, vectors = tridiagonal_eigen(list(diag), [abs(v) for v in off])
    return [values, [mass * v[0] ** 2 for v in vectors]]


def gauss_rule(table: RecurrenceTable, m: int, ctx: PrecisionContext) -> QuadratureRule:
    """
    m-point Gauss rule for the weight of `table`. Needs B_0..B_{m-1} and A_1..A_{m-1},
    so m may reach n_max + 1.
    """
    if not 1 <= m <= table.n_max + 1:
        raise DomainError(f"a table of degree {table.n_max} supports 1 <= m <= {table.n_max + 1}, got {m}")
    with mp.workprec(table.bits):
        mass = 1 / table.a(0) ** 2
        diag = [table.B(k) for k in range(m)]
        off = [table.A(k) for k in range(1, m)]
        nodes, weights = jacobi_rule(diag, off, mass)
        logger.debug(f"Gauss rule with {m} nodes at nu={mp.nstr(table.nu, 8)} t={mp.nstr(table.t, 8)}")
        return QuadratureRule(nu=table.nu, t=table.t, m=m, nodes=nodes, weights=weights)


def integrate(
    rule: QuadratureRule,
    f: Callable[[mpf], mpf],
    degree: Optional[int] = None,
    *,
    carrier_degree: Optional[int] = None,
) -> mpf:
    """
    sum_i w_i f(x_i). Polynomial integrands declare `degree` (exact up to 2m - 1);
    anything else declares the polynomial degree it carries and needs m >= 2 carrier_degree.
    """
    if degree is None and carrier_degree is None:
        raise DomainError("integrate needs the integrand's degree or carrier_degree")
    if degree is not None and degree > 2 * rule.m - 1:
        raise DomainError(f"degree {degree} exceeds the exactness 2m - 1 = {2 * rule.m - 1}")
    if carrier_degree is not None and rule.m < 2 * carrier_degree:
        raise DomainError(f"carrier degree {carrier_degree} needs m >= {2 * carrier_degree}, got {rule.m}")
    total = []
    for x, w in zip(rule.nodes, rule.weights):
        value = mp.mpf(f(x))
        if mp.isnan(value) or mp.isinf(value):
            raise DomainError(f"integrand is not finite at node {mp.nstr(x, 10)}")
        total.append(w * value)
    return mp.fsum(total)


def gram(table: RecurrenceTable, rule: QuadratureRule, n_max: int) -> List[List[mpf]]:
    """[<P_i, P_j>] for i, j <= n_max under `rule`; exact when rule.m >= n_max + 1."""
    if rule.m < n_max + 1:
        raise DomainError(f"a Gram matrix up to degree {n_max} needs m >= {n_max + 1}, got {rule.m}")
    if n_max > table.n_max:
        raise DomainError(f"table only reaches degree {table.n_max}")
    with mp.workprec(table.bits):
        values = [evaluate_all(table, n_max, x) for x in rule.nodes]
        return [
            [mp.fsum(w * v[i] * v[j] for w, v in zip(rule.weights, values)) for j in range(n_max + 1)]
            for i in range(n_max + 1)
        ]
