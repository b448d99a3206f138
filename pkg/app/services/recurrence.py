# File: app/services/recurrence.py

import logging
import threading
from collections import OrderedDict
from typing import Any, List, Optional, Tuple

from mpmath import mp, mpf

from app.core.config import settings
from app.core.errors import DegenerateDenominator, DomainError
from app.schemas.precision import PrecisionContext
from app.schemas.recurrence import RecurrenceRow, RecurrenceTable
from app.services.linalg import cholesky_upper, determinant
from app.services.numerics import adaptive_retry
from app.services.rho import moment_table

logger = logging.getLogger(__name__)

_tables: "OrderedDict[tuple, RecurrenceTable]" = OrderedDict()
_tables_lock = threading.Lock()
_TABLE_CACHE_SIZE = 512


def _get_from_cache(cache_key: tuple) -> Optional[RecurrenceTable]:
    with _tables_lock:
        table = _tables.get(cache_key)
    if table is not None:
        logger.debug(f"Cache hit for key: {cache_key}")
    return table


def _set_to_cache(cache_key: tuple, table: RecurrenceTable) -> None:
    with _tables_lock:
        _tables[cache_key] = table
        while len(_tables) > _TABLE_CACHE_SIZE:
            _tables.popitem(last=False)


def _jacobi_from_moments(moments: List[mpf], size: int, ctx: PrecisionContext) -> List[mpf]:
    """B_0..B_{size-2} followed by |A_1|..|A_{size-1}| from the upper Cholesky factor."""
    with mp.workprec(ctx.bits):
        hankel = [[moments[i + j] for j in range(size)] for i in range(size)]
        r = cholesky_upper(hankel)
        diagonal = []
        for k in range(size - 1):
            value = r[k][k + 1] / r[k][k]
            if k > 0:
                value -= r[k - 1][k] / r[k - 1][k - 1]
            diagonal.append(value)
        off = [r[k + 1][k + 1] / r[k][k] for k in range(size - 1)]
        return diagonal + off


def build(nu: Any, t: Any, n_max: int, ctx: PrecisionContext, *, seeded: bool = False) -> RecurrenceTable:
    """
    Recurrence table for n = 0..n_max by Cholesky reduction of the moment Hankel
    matrix of size n_max + 2, which also yields A_{n_max+1}.

    Moments are integrated at ctx.internal_digits; the elimination runs under
    adaptive_retry. Coefficient rows follow from
    A_{n+1} a_{n+1,k} = a_{n,k-1} - B_n a_{n,k} - A_n a_{n-1,k}.
    """
    if n_max < 0:
        raise DomainError(f"n_max must be nonnegative, got {n_max}")
    if n_max > settings.OPOLY_N_MAX_HARD:
        raise DomainError(f"n_max={n_max} is above the hard cap {settings.OPOLY_N_MAX_HARD}")
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        if not t > 0:
            raise DomainError(f"the weight needs t > 0, got {t}")
        cache_key = (nu, t, n_max, ctx.bits, ctx.target_digits, seeded)
        cached = _get_from_cache(cache_key)
        if cached is not None:
            return cached

        size = n_max + 2
        moments = moment_table(nu, t, 1, 2 * size - 1, ctx.internal(), seeded=seeded).values
        jacobi, achieved = adaptive_retry(lambda c: _jacobi_from_moments(moments, size, c), ctx)
        diagonal = jacobi[: size - 1]
        off = [-value for value in jacobi[size - 1:]]

        rows: List[List[mpf]] = [[1 / mp.sqrt(moments[0])]]
        for n in range(n_max):
            previous = rows[n - 1] if n > 0 else []
            a_off = off[n - 1] if n > 0 else mp.zero
            nxt = []
            for k in range(n + 2):
                value = rows[n][k - 1] if k >= 1 else mp.zero
                if k <= n:
                    value -= diagonal[n] * rows[n][k]
                if k < len(previous):
                    value -= a_off * previous[k]
                nxt.append(value / off[n])
            rows.append(nxt)

        records = [
            RecurrenceRow(
                n=n,
                a_n=rows[n][n],
                b_n=rows[n][n - 1] if n > 0 else mp.zero,
                A_n=off[n - 1] if n > 0 else mp.zero,
                B_n=diagonal[n],
                coeffs=rows[n],
            )
            for n in range(n_max + 1)
        ]
        table = RecurrenceTable(
            nu=nu, t=t, n_max=n_max, rows=records, A_next=off[n_max],
            bits=ctx.bits, achieved_bits=achieved,
        )
        logger.info(
            f"Recurrence table nu={mp.nstr(nu, 10)} t={mp.nstr(t, 10)} n_max={n_max} "
            f"built at {ctx.bits} bits (stable at {achieved})"
        )
        _set_to_cache(cache_key, table)
        return table


def _forward(table: RecurrenceTable, n: int, x: mpf) -> List[mpf]:
    """P_0..P_n at x; n may reach n_max + 1."""
    values = [table.free_term(0)]
    previous = mp.zero
    for k in range(n):
        nxt = ((x - table.B(k)) * values[k] - table.A(k) * previous) / table.A(k + 1)
        previous = values[k]
        values.append(nxt)
    return values


def evaluate_all(table: RecurrenceTable, n: int, x: Any) -> List[mpf]:
    if not 0 <= n <= table.n_max:
        raise IndexError(f"degree {n} outside 0..{table.n_max}")
    with mp.workprec(table.bits):
        return _forward(table, n, mp.mpf(x))


def evaluate(table: RecurrenceTable, n: int, x: Any) -> mpf:
    """P_n(x, t) by the forward three-term recurrence."""
    return evaluate_all(table, n, x)[n]


def polyval(coeffs: List[mpf], x: mpf) -> mpf:
    value = mp.zero
    for c in reversed(coeffs):
        value = value * x + c
    return value


def derivatives(table: RecurrenceTable, n: int, x: Any, order: int = 2, *, absolute: bool = False) -> List[mpf]:
    """
    [P_n, P_n', P_n''] (up to `order`) at x from the coefficient row. With absolute
    the row is replaced by |a_{n,k}| and x by |x|, giving the scale rounding errors live on.
    """
    if not 0 <= n <= table.n_max:
        raise IndexError(f"degree {n} outside 0..{table.n_max}")
    if order not in (0, 1, 2):
        raise DomainError(f"x-derivatives are provided up to order 2, got {order}")
    with mp.workprec(table.bits):
        x = mp.mpf(x)
        coeffs = list(table.coeffs(n))
        if absolute:
            x, coeffs = abs(x), [abs(c) for c in coeffs]
        out = [polyval(coeffs, x)]
        for _ in range(order):
            coeffs = [k * coeffs[k] for k in range(1, len(coeffs))]
            out.append(polyval(coeffs, x))
        return out


def determinant_eval(nu: Any, t: Any, n: int, x: Any, ctx: PrecisionContext) -> Tuple[mpf, int]:
    """
    P_n(x, t) as (-1)^n det[moments; 1 x .. x^n] / sqrt(G_{n-1} G_n).
    Limited to n <= 8; returns (value, achieved_bits).
    """
    if not 0 <= n <= 8:
        raise DomainError(f"determinant evaluation supports 0 <= n <= 8, got {n}")
    with mp.workprec(ctx.bits):
        nu, t, x = mp.mpf(nu), mp.mpf(t), mp.mpf(x)
        moments = moment_table(nu, t, 1, 2 * n + 1, ctx.internal()).values

        def compute(c: PrecisionContext) -> mpf:
            with mp.workprec(c.bits):
                bordered = [[moments[r + col] for col in range(n + 1)] for r in range(n)]
                bordered.append([x ** col for col in range(n + 1)])
                g_n = determinant([[moments[r + col] for col in range(n + 1)] for r in range(n + 1)])
                g_prev = determinant([[moments[r + col] for col in range(n)] for r in range(n)])
                return (-1) ** n * determinant(bordered) / mp.sqrt(g_prev * g_n)

        return adaptive_retry(compute, ctx)


def free_term_product(table: RecurrenceTable, ctx: PrecisionContext) -> List[mpf]:
    """
    a_{n,0} for n = 0..n_max from a_{n,0} = (1/(a_n rho_{nu+1})) prod_k E_k / S_k,
    with rho_{nu+1} = a_0^{-2}.
    """
    with mp.workprec(table.bits):
        eps = mp.mpf(10) ** (-mp.mpf(ctx.target_digits) / 2)
        out = []
        product = mp.one
        a0_sq = table.a(0) ** 2
        for n in range(table.n_max + 1):
            if n > 0:
                s_n = table.S(n)
                if abs(s_n) <= eps * max(table.A(n) ** 2, abs(table.b_over_a(n))):
                    raise DegenerateDenominator(f"A_{n}^2 + b_{n}/a_{n} vanished at working tolerance")
                product *= table.E(n) / s_n
            out.append(a0_sq * product / table.a(n))
        return out


def christoffel_darboux(table: RecurrenceTable, n: int, x: Any, y: Any) -> Tuple[mpf, mpf]:
    """(sum_{k<=n} P_k(x)P_k(y), A_{n+1}[P_{n+1}(x)P_n(y) - P_n(x)P_{n+1}(y)]/(x - y)); n <= n_max."""
    if not 0 <= n <= table.n_max:
        raise IndexError(f"degree {n} outside 0..{table.n_max}")
    with mp.workprec(table.bits):
        x, y = mp.mpf(x), mp.mpf(y)
        if x == y:
            raise DomainError("Christoffel-Darboux needs x != y")
        px, py = _forward(table, n + 1, x), _forward(table, n + 1, y)
        lhs = mp.fsum(px[k] * py[k] for k in range(n + 1))
        rhs = table.A(n + 1) * (px[n + 1] * py[n] - px[n] * py[n + 1]) / (x - y)
        return lhs, rhs


def table_invariant_violations(table: RecurrenceTable, ctx: PrecisionContext) -> List[str]:
    """Sign, positivity and coefficient-consistency conditions that do not hold."""
    problems = []
    with mp.workprec(table.bits):
        tol = mp.mpf(10) ** (-mp.mpf(ctx.target_digits) / 2)
        for n in range(table.n_max + 1):
            if (table.a(n) > 0) != (n % 2 == 0):
                problems.append(f"sign of a_{n} is not (-1)^{n}")
            if not table.B(n) > 0:
                problems.append(f"B_{n} is not positive")
            if not table.B(n) > 2 * n + table.nu + 1:
                problems.append(f"B_{n} does not exceed 2n + nu + 1")
            if n >= 1:
                if not table.A(n) < 0:
                    problems.append(f"A_{n} is not negative")
                if abs(table.A(n) * table.a(n) - table.a(n - 1)) > tol * abs(table.a(n - 1)):
                    problems.append(f"A_{n} a_{n} != a_{n - 1}")
            if n < table.n_max:
                b_diff = table.b_over_a(n) - table.b_over_a(n + 1)
                if abs(table.B(n) - b_diff) > tol * max(mp.one, abs(table.B(n))):
                    problems.append(f"B_{n} != b_{n}/a_{n} - b_{n + 1}/a_{n + 1}")
        if not table.A_next < 0:
            problems.append(f"A_{table.n_max + 1} is not negative")
    return problems
