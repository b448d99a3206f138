# File: app/services/hankel.py

"""
Moment Hankel determinants G_n, their column-deleted minors, the double family
H_{i,j} and the identities tying them to the recurrence coefficients.
"""

import logging
from typing import Any, Callable, Dict, List, Tuple

from mpmath import mp, mpf

from app.core.errors import DomainError, NotPositiveDefinite, OpolyError
from app.schemas.hankel import HankelValue, HPair
from app.schemas.precision import PrecisionContext
from app.schemas.recurrence import RecurrenceTable
from app.schemas.report import Method, ResidualReport
from app.services.linalg import determinant
from app.services.numerics import adaptive_retry, difference, stencil
from app.services.recurrence import build
from app.services.residuals import normalized, report, residual_entry, worst
from app.services.rho import moment_table

logger = logging.getLogger(__name__)

G_DETERMINANT_CAP = 8
H_DETERMINANT_CAP = 6


class MomentWindow:
    """
    rho_{nu+m}(t) for lo <= m <= hi, with the determinant families built on them.
    Every determinant runs under adaptive_retry on the fixed moment values and is memoized.
    """

    def __init__(self, nu: mpf, t: mpf, lo: int, hi: int, ctx: PrecisionContext):
        self.nu, self.t, self.lo, self.hi = nu, t, lo, hi
        self.ctx = ctx
        self.bits = ctx.bits
        values = moment_table(nu, t, lo, hi, ctx.internal()).values
        self.values: Dict[int, mpf] = {lo + i: v for i, v in enumerate(values)}
        self._memo: Dict[Tuple, mpf] = {}

    def rho(self, m: int) -> mpf:
        if m not in self.values:
            raise DomainError(f"moment index {m} outside the loaded window [{self.lo}, {self.hi}]")
        return self.values[m]

    def _retried(self, key: Tuple, rows: Callable[[], List[List[mpf]]]) -> mpf:
        if key not in self._memo:
            def compute(c: PrecisionContext) -> mpf:
                with mp.workprec(c.bits):
                    return determinant(rows())

            self._memo[key] = adaptive_retry(compute, self.ctx)[0]
        return self._memo[key]

    def g_matrix(self, n: int, shift: int = 0) -> List[List[mpf]]:
        return [[self.rho(shift + r + c + 1) for c in range(n + 1)] for r in range(n + 1)]

    def g(self, n: int, shift: int = 0) -> mpf:
        """G_n^{nu+shift}; G_{-1} = 1."""
        if n < 0:
            return mp.one
        return self._retried(("g", n, shift), lambda: self.g_matrix(n, shift))

    def g_minor(self, n: int, k: int) -> mpf:
        columns = [c for c in range(1, n + 2) if c != k]
        return self._retried(("minor", n, k), lambda: [[self.rho(r + c) for c in columns] for r in range(n)])

    def h(self, i: int, j: int, n: int) -> mpf:
        if i == j:
            return mp.zero
        if i > j:
            return -self.h(j, i, n)

        def rows() -> List[List[mpf]]:
            return [
                [self.rho(i + r), self.rho(j + r)] + [r * self.rho(r + 2 + c) for c in range(n - 1)]
                for r in range(n + 1)
            ]

        return self._retried(("h", i, j, n), rows)

    def d(self, i: int, n: int) -> mpf:
        return self._retried(
            ("d", i, n),
            lambda: [[self.rho(i + r)] + [self.rho(3 + c + r) for c in range(n - 1)] for r in range(n)],
        )


def _window(nu: mpf, t: mpf, lo: int, hi: int, ctx: PrecisionContext) -> MomentWindow:
    if not t > 0:
        raise DomainError(f"the weight needs t > 0, got {t}")
    return MomentWindow(nu, t, lo, hi, ctx)


def g_determinant(nu: Any, t: Any, n: int, ctx: PrecisionContext) -> HankelValue:
    """G_n^nu(t) = det[rho_{nu+i+j+1}]_{i,j=0..n}; above order 8 from the Cholesky product."""
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        if n < -1:
            raise DomainError(f"Hankel order must be >= -1, got {n}")
        if n == -1:
            return HankelValue(nu=nu, t=t, n=-1, value=mp.one, achieved_bits=ctx.bits)
        if n > G_DETERMINANT_CAP:
            table = build(nu, t, n, ctx)
            value = mp.one
            for k in range(n + 1):
                value /= table.a(k) ** 2
            achieved = table.achieved_bits
        else:
            window = _window(nu, t, 1, 2 * n + 1, ctx)

            def compute(c: PrecisionContext) -> mpf:
                with mp.workprec(c.bits):
                    return determinant(window.g_matrix(n))

            value, achieved = adaptive_retry(compute, ctx)
        if not value > 0:
            raise NotPositiveDefinite(f"G_{n} = {mp.nstr(value, 8)} is not positive")
        return HankelValue(nu=nu, t=t, n=n, value=value, achieved_bits=achieved)


def g_minor(nu: Any, t: Any, n: int, k: int, ctx: PrecisionContext) -> mpf:
    """
    G_{n,k}: rows r = 0..n-1, columns c in {1..n+1} without k, entries rho_{nu+r+c}.
    The last-row Laplace expansion of G_n runs over k = 1..n+1.
    """
    if n < 0 or not 1 <= k <= n + 1:
        raise DomainError(f"minor G_{{{n},{k}}} needs 1 <= k <= n + 1")
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        if n == 0:
            return mp.one
        return _window(nu, t, 1, 2 * n, ctx).g_minor(n, k)


def h_determinant(i: int, j: int, nu: Any, t: Any, n: int, ctx: PrecisionContext) -> HPair:
    """
    H_{i,j}: (n+1)-square, row r = [rho_{nu+i+r}, rho_{nu+j+r}, r rho_{nu+r+2+c} (c = 0..n-2)].
    H_{i,i} = 0 and H_{j,i} = -H_{i,j} hold exactly.
    """
    if not 1 <= n <= H_DETERMINANT_CAP:
        raise DomainError(f"H determinants support 1 <= n <= {H_DETERMINANT_CAP}, got {n}")
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        if i == j:
            return HPair(i=i, j=j, nu=nu, n=n, t=t, value=mp.zero)
        lo, hi = min(i, j, 2), max(i, j) + n
        hi = max(hi, 2 * n)
        value = _window(nu, t, lo, hi, ctx).h(i, j, n)
        return HPair(i=i, j=j, nu=nu, n=n, t=t, value=value)


def d_determinant(i: int, nu: Any, t: Any, n: int, ctx: PrecisionContext) -> mpf:
    """D_i: n-square, row r = [rho_{nu+i+r}, rho_{nu+3+c+r} (c = 0..n-2)]."""
    if not 1 <= n <= H_DETERMINANT_CAP:
        raise DomainError(f"D determinants support 1 <= n <= {H_DETERMINANT_CAP}, got {n}")
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        window = _window(nu, t, min(i, 3), max(i, 3) + 2 * n, ctx)
        return window.d(i, n)


# ---------------------------------------------------------------------------
# Determinant-level identities
# ---------------------------------------------------------------------------

def _derivative(
    windows: Dict[mpf, MomentWindow],
    quantity: Callable[[MomentWindow], mpf],
    t: mpf,
    order: int,
    ctx: PrecisionContext,
) -> mpf:
    points = stencil(t, order, ctx)
    return difference([quantity(windows[p]) for p in points], t, order, ctx)


def check_det_formulas(table: RecurrenceTable, ctx: PrecisionContext) -> ResidualReport:
    """
    Determinant identities against `table`. Each family is evaluated independently;
    a family that cannot be computed is logged and leaves its rows out.
    """
    with mp.workprec(ctx.bits):
        nu, t = table.nu, table.t
        g_top = min(table.n_max, G_DETERMINANT_CAP - 1)
        h_top = min(table.n_max, H_DETERMINANT_CAP)
        lo, hi = -1, 2 * (g_top + 1) + 3
        center = _window(nu, t, lo, hi, ctx)
        points = set(stencil(t, 1, ctx)) | set(stencil(t, 2, ctx))
        windows = {p: (center if p == t else _window(nu, p, lo, hi, ctx)) for p in points}
        windows[t] = center

        entries = []
        errors = []

        def family(name: str, body: Callable[[], None]) -> None:
            try:
                body()
            except (OpolyError, ArithmeticError, ValueError) as exc:
                logger.error(f"Determinant family {name} failed at nu={mp.nstr(nu, 8)} t={mp.nstr(t, 8)}: {exc}", exc_info=True)
                errors.append(f"{name}: {type(exc).__name__}: {exc}")

        g = {n: center.g(n) for n in range(-1, g_top + 2)}

        def row(identity_id: str, n: int, terms: List[Any], method: Method = Method.ALGEBRAIC, order: int = 1) -> None:
            entries.append(residual_entry(identity_id, n, nu, t, terms, method, ctx, order=order))

        def laplace_and_free_terms() -> None:
            for n in range(0, g_top + 1):
                cofactors = [
                    (-1) ** (n + 1 + c) * center.rho(n + c) * center.g_minor(n, c) / g[n]
                    for c in range(1, n + 2)
                ]
                row("3.20", n, [mp.one] + [-v for v in cofactors])
                row("3.22", n, [mp.one, -center.g_minor(n, 1) / (mp.sqrt(g[n - 1] * g[n]) * table.free_term(n))])
                row("3.23", n, [abs(table.a(n)) * mp.sqrt(g[n] / g[n - 1]), -1])
                weighted = [table.a(n) * center.rho(n + k + 1) * table.coeffs(n)[k] for k in range(n + 1)]
                row("3.27", n, weighted + [-1])

        def shifted_nu() -> None:
            upper = build(nu + 1, t, table.n_max, ctx)
            for n in range(0, g_top + 1):
                ratio = (-1) ** n * table.a(n) * table.free_term(n) * g[n] / center.g(n - 1, shift=1)
                row("3.24", n, [ratio, -1])
            for n in range(0, table.n_max):
                a_sq = table.a(n) ** 2
                row("3.25", n, [
                    upper.a(n) ** 2 * (2 * n + nu + 3 - table.B(n + 1)) / a_sq,
                    -1,
                    -table.a(n + 1) * table.b(n + 1) / a_sq,
                ])
                shifted = mp.one
                plain = mp.one
                for k in range(n + 1):
                    shifted *= upper.a(k) ** 2
                    plain *= table.a(k) ** 2
                row("3.26", n, [
                    shifted * table.free_term(n + 1) / ((-1) ** (n + 1) * table.a(n + 1) * plain),
                    -1,
                ])

        def log_g_derivatives() -> None:
            def log_g(n: int) -> Callable[[MomentWindow], mpf]:
                return lambda w: mp.log(w.g(n)) if n >= 0 else mp.zero

            for n in range(0, g_top + 1):
                first = t * _derivative(windows, log_g(n), t, 1, ctx)
                first_prev = t * _derivative(windows, log_g(n - 1), t, 1, ctx)
                row("3.28", n, [table.B(n), -(2 * n + nu + 1), -first_prev, first], Method.FINITE_DIFFERENCE)
                if n + 1 <= table.n_max:
                    row("3.31", n, [first, -table.b_over_a(n + 1), -(n + 1) * (n + nu + 1)], Method.FINITE_DIFFERENCE)
                second = t ** 2 * _derivative(windows, log_g(n), t, 2, ctx)
                row("3.32", n, [second, -table.A(n + 1) ** 2, (n + 1) * (n + 1 + nu)], Method.FINITE_DIFFERENCE, order=2)

        def off_diagonal_magnitude() -> None:
            for n in range(1, g_top + 1):
                terms = [abs(table.A(n + 1)) * g[n] / mp.sqrt(g[n - 1] * g[n + 1]), -1]
                if not table.A(n + 1) < 0:
                    terms = [mp.inf]
                row("3.29", n, terms)

        def double_family() -> None:
            for n in range(1, h_top + 1):
                row("3.36", n, worst(
                    [center.h(j, j + 1, n) / (t ** (j - 1) * g[n]), -((-1) ** (j + 1))]
                    for j in range(1, n + 1)
                ))
                window_ij = [(i, j) for i in range(1, n + 2) for j in range(1, n + 2)]
                fact = mp.factorial(n)
                row("3.37", n, worst(
                    [center.h(i, j, n), -(nu + i - 1) * center.h(i - 1, j, n), -t * center.h(i - 2, j, n),
                     fact * center.rho(j) * center.d(i, n)]
                    for i, j in window_ij
                ))
                row("3.38", n, worst(
                    [center.h(i, j, n), -(nu + j - 1) * center.h(i, j - 1, n), -t * center.h(i, j - 2, n),
                     -fact * center.rho(i) * center.d(j, n)]
                    for i, j in window_ij
                ))
                if n >= 2:
                    row("3.40", n, worst(
                        [(nu + i - 1) * center.h(i - 1, j, n), (nu + j - 1) * center.h(j - 1, i, n),
                         t * center.h(i - 2, j, n), t * center.h(j - 2, i, n)]
                        for i in range(3, n + 2) for j in range(3, n + 2)
                    ))
                sign = (-1) ** (n + 1)
                row("3.41", n, normalized([
                    center.h(n + 2, n + 1, n),
                    -sign * t ** n * g[n],
                    sign * fact * center.rho(n + 1) * center.g(n - 1, shift=2),
                ]))

        def mixed_derivative() -> None:
            for n in range(1, h_top + 1):
                fact = mp.factorial(n)
                dg = _derivative(windows, lambda w: w.g(n), t, 1, ctx)
                dh = _derivative(windows, lambda w: w.h(0, 1, n), t, 1, ctx)
                terms = [
                    t * dg,
                    -(nu + 1) * g[n],
                    fact * center.rho(2) * center.g(n - 1, shift=1),
                    t ** 2 * dh,
                    t ** 2 * center.h(-1, 1, n),
                ]
                row("3.43", n, [v / g[n] for v in terms], Method.FINITE_DIFFERENCE)

        family("laplace", laplace_and_free_terms)
        family("nu-shift", shifted_nu)
        family("log-derivatives", log_g_derivatives)
        family("off-diagonal", off_diagonal_magnitude)
        family("double-determinants", double_family)
        family("mixed-derivative", mixed_derivative)

        result = report(entries)
        result.errors.extend(errors)
        logger.info(f"Determinant identities: {len(result.entries)} rows, {len(result.failures())} failing")
        return result
