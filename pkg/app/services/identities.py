# File: app/services/identities.py

"""
Residual checks of the identities satisfied by P_n^nu(x, t) and its recurrence data.

Every identity is written as a list of terms summing to zero in a dimensionless,
t-scaled form. Checks return a ResidualReport with one row per (identity id, n);
rows evaluated at several x samples keep the worst sample.
"""

import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from mpmath import mp, mpf

from app.core.config import settings
from app.core.errors import DomainError, GridTooCoarse, OpolyError
from app.schemas.laguerre import LimitQuantity
from app.schemas.precision import PrecisionContext
from app.schemas.recurrence import RecurrenceTable
from app.schemas.report import Method, ResidualEntry, ResidualReport
from app.services.expansion import check_expansion
from app.services.hankel import check_det_formulas
from app.services.laguerre import laguerre_eval, limit_values
from app.services.numerics import difference, integrate_halfline_batch, stencil
from app.services.recurrence import (
    build,
    christoffel_darboux,
    derivatives,
    evaluate,
    evaluate_all,
    free_term_product,
)
from app.services.residuals import failed_entry, magnitude, report, residual_entry, worst
from app.services.rho import moment_table
from app.services.sampling import x_samples
from app.services.tgrid import GridLadder, GridTables

logger = logging.getLogger(__name__)

REQUIRED_IDS = [
    "2.1", "2.2", "2.3", "2.4", "2.5", "2.10", "2.11", "2.15", "2.16", "2.18", "2.22", "2.26",
    "2.27", "2.28", "2.29", "2.32", "2.33", "2.34", "2.35", "2.37", "2.38", "3.1", "3.2", "3.3",
    "3.6", "3.8", "3.11", "3.12", "3.13", "3.16", "3.17", "3.22", "3.23", "3.24", "3.25", "3.26",
    "3.27", "3.28", "3.29", "3.31", "3.32", "3.36", "3.40", "3.41", "3.43", "4.3", "4.11", "4.12",
]
SUPPLEMENTARY_IDS = [
    "1.5", "1.6", "1.16", "1.19", "1.20", "1.21", "1.22", "2.20", "2.36", "3.5", "3.14", "3.20",
    "3.37", "3.38", "4.2", "4.10",
]
KNOWN_IDS = REQUIRED_IDS + SUPPLEMENTARY_IDS

# Smallest n_max at which an identity produces a row.
_MIN_N_MAX = {
    **{i: 1 for i in [
        "2.3", "2.4", "2.5", "2.11", "2.26", "2.32", "2.35", "2.37", "2.38", "3.2", "3.3", "3.6",
        "3.8", "3.11", "3.12", "3.13", "3.17", "3.25", "3.26", "3.29", "3.31", "3.36", "3.41",
        "3.43", "4.11", "4.12",
    ]},
    "3.40": 2,
}
_EXPANSION_IDS = {"4.3", "4.11", "4.12"}

FD_T_IDS = {"2.15", "2.20", "2.26", "2.27", "2.28", "2.29", "2.35", "2.36", "3.3", "3.16"}
GRID_T_IDS = {"2.16", "2.18", "2.32", "2.33", "2.34", "2.37", "3.17"}


def _rows(entries: Iterable[ResidualEntry], label: str) -> ResidualReport:
    result = report(entries)
    logger.info(f"{label}: {len(result.entries)} rows, {len(result.failures())} failing")
    return result


# ---------------------------------------------------------------------------
# Recurrence-level identities
# ---------------------------------------------------------------------------

def check_recurrence_identities(table: RecurrenceTable, samples: Sequence, ctx: PrecisionContext) -> ResidualReport:
    """Coefficient relations of the three-term recurrence, Christoffel-Darboux, the moment recurrence and the basic integrals."""
    with mp.workprec(ctx.bits):
        nu, t, top = table.nu, table.t, table.n_max
        samples = [mp.mpf(x) for x in samples]
        entries = []
        for n in range(top + 1):
            relations = []
            if n >= 1:
                relations.append([table.A(n) * table.a(n) / table.a(n - 1), -1])
            if n < top:
                relations.append([table.B(n), -table.b_over_a(n), table.b_over_a(n + 1)])
            if relations:
                entries.append(residual_entry("1.5", n, nu, t, worst(relations), Method.ALGEBRAIC, ctx))
            pairs = list(zip(samples, samples[1:]))
            if pairs:
                sides = [christoffel_darboux(table, n, x, y) for x, y in pairs]
                entries.append(residual_entry("1.6", n, nu, t, worst([lhs, -rhs] for lhs, rhs in sides), Method.ALGEBRAIC, ctx))

        moments = moment_table(nu, t, -1, 2 * top + 3, ctx)
        entries.append(residual_entry("1.16", 0, nu, t, worst(
            [moments.rho(k + 1), -(nu + k) * moments.rho(k), -t * moments.rho(k - 1)]
            for k in range(0, 2 * top + 3)
        ), Method.ALGEBRAIC, ctx))

        def integrand(x: mpf) -> List[mpf]:
            row = evaluate_all(table, top, x)
            w = mp.exp(-x - t / x) * x ** nu
            out = []
            for n in range(top + 1):
                out += [
                    row[n] ** 2 * x * w,
                    row[n] * x ** n * w,
                    row[n] * x ** (n + 1) * w,
                    row[n] * row[n - 1] * x * w if n >= 1 else mp.zero,
                ]
            return out

        values = [r.value for r in integrate_halfline_batch(integrand, ctx)]
        for n in range(top + 1):
            squared, power, next_power, mixed = values[4 * n: 4 * n + 4]
            entries.append(residual_entry("1.19", n, nu, t, [squared, -table.B(n)], Method.QUADRATURE, ctx))
            entries.append(residual_entry("1.20", n, nu, t, [table.a(n) * power, -1], Method.QUADRATURE, ctx))
            if n < top:
                entries.append(residual_entry("1.21", n, nu, t, [table.a(n) * next_power, table.b_over_a(n + 1)], Method.QUADRATURE, ctx))
            if n >= 1:
                entries.append(residual_entry("1.22", n, nu, t, [mixed, -table.A(n)], Method.QUADRATURE, ctx))
        return _rows(entries, "Recurrence identities")


# ---------------------------------------------------------------------------
# Inverse moments and x-derivatives
# ---------------------------------------------------------------------------

def check_inverse_moments(table: RecurrenceTable, ctx: PrecisionContext) -> ResidualReport:
    """
    The integrals of P_n^2 and P_nP_{n-1} against x^{nu-1} and x^{nu-2} times
    e^{-x-t/x}, by one vector quadrature, against their recurrence expressions.
    """
    with mp.workprec(ctx.bits):
        nu, t, top = table.nu, table.t, table.n_max

        def integrand(x: mpf) -> List[mpf]:
            row = evaluate_all(table, top, x)
            w = mp.exp(-x - t / x) * x ** (nu - 1)
            out = []
            for n in range(top + 1):
                square = row[n] ** 2 * w
                mixed = row[n] * row[n - 1] * w if n >= 1 else mp.zero
                out += [square, square / x, mixed, mixed / x]
            return out

        values = [r.value for r in integrate_halfline_batch(integrand, ctx)]
        entries = []
        for n in range(top + 1):
            i1, i2, i3, i4 = values[4 * n: 4 * n + 4]
            e_n = table.E(n)
            entries.append(residual_entry("2.1", n, nu, t, [t * i1, -e_n], Method.QUADRATURE, ctx))
            entries.append(residual_entry("2.2", n, nu, t, [t * i2, -1, nu / t * e_n], Method.QUADRATURE, ctx))
            if n >= 1:
                a_n, ratio = table.A(n), table.b_over_a(n)
                entries.append(residual_entry("2.3", n, nu, t, [t * i3, -a_n, -ratio / a_n], Method.QUADRATURE, ctx))
                entries.append(residual_entry(
                    "2.4", n, nu, t, [t * i4, nu / t * (a_n + ratio / a_n), n / a_n], Method.QUADRATURE, ctx,
                ))
        return _rows(entries, "Inverse-moment identities")


def check_x_derivative(table: RecurrenceTable, samples: Sequence, ctx: PrecisionContext) -> ResidualReport:
    """The first-order differential-difference equation in x, its x = 0 form and the free-term product."""
    with mp.workprec(ctx.bits):
        nu, t = table.nu, table.t
        points = [mp.zero] + [mp.mpf(x) for x in samples]
        entries = []
        for n in range(1, table.n_max + 1):
            s_n, e_n, a_n = table.S(n), table.E(n), table.A(n)
            sets = []
            for x in points:
                row = evaluate_all(table, n, x)
                slope = derivatives(table, n, x, 1)[1]
                sets.append([x * x * slope, -(n * x - s_n) * row[n], -a_n * (x + e_n) * row[n - 1]])
            entries.append(residual_entry("2.5", n, nu, t, worst(sets), Method.ALGEBRAIC, ctx))
            entries.append(residual_entry(
                "2.11", n, nu, t, [s_n, -e_n * a_n * table.free_term(n - 1) / table.free_term(n)], Method.ALGEBRAIC, ctx,
            ))
        for n, value in enumerate(free_term_product(table, ctx)):
            entries.append(residual_entry("2.10", n, nu, t, [value / table.free_term(n), -1], Method.ALGEBRAIC, ctx))
        return _rows(entries, "x-derivative identities")


# ---------------------------------------------------------------------------
# t-derivatives by central differences
# ---------------------------------------------------------------------------

class StencilTables:
    """Tables at t and at both difference stencils, shared read-only by the t-derivative checks."""

    def __init__(self, nu, t, n_max: int, ctx: PrecisionContext):
        with mp.workprec(ctx.bits):
            self.ctx = ctx
            self.nu, self.t = mp.mpf(nu), mp.mpf(t)
            self.center = build(self.nu, self.t, n_max, ctx)
            self.first = [build(self.nu, p, n_max, ctx) for p in stencil(self.t, 1, ctx)]
            self.second = [build(self.nu, p, n_max, ctx) for p in stencil(self.t, 2, ctx)]

    def t_d(self, quantity: Callable[[RecurrenceTable], mpf]) -> mpf:
        """t f'(t)."""
        return self.t * difference([quantity(tb) for tb in self.first], self.t, 1, self.ctx)

    def t2_d2(self, quantity: Callable[[RecurrenceTable], mpf]) -> mpf:
        """t^2 f''(t)."""
        return self.t ** 2 * difference([quantity(tb) for tb in self.second], self.t, 2, self.ctx)


def _difference_rows(st: StencilTables, n_max: int, ids: Set[str], ctx: PrecisionContext) -> List[ResidualEntry]:
    nu, t, c = st.nu, st.t, st.center
    fd = Method.FINITE_DIFFERENCE
    entries = []

    def row(identity_id: str, n: int, terms: List[mpf], order: int = 1) -> None:
        if identity_id in ids:
            entries.append(residual_entry(identity_id, n, nu, t, terms, fd, ctx, order=order))

    if "2.20" in ids:
        rho = moment_table(nu, t, 0, 2, ctx.internal())
        row("2.20", 0, [
            st.t_d(lambda tb: tb.B(0)),
            -t * (rho.rho(2) * rho.rho(0) / rho.rho(1) ** 2 - 1),
        ])

    for n in range(n_max + 1):
        log_a = st.t_d(lambda tb: tb.a(n)) / c.a(n)
        t_b = st.t_d(lambda tb: tb.B(n))
        row("2.15", n, [log_a, -c.E(n) / 2])
        row("2.27", n, [t_b, -c.A(n) ** 2, c.A(n + 1) ** 2, -c.B(n)])
        lower = c.A(n) * c.free_term(n - 1) / c.free_term(n) if n >= 1 else mp.zero
        row("2.28", n, [st.t_d(lambda tb: tb.free_term(n)) / c.free_term(n), -(c.B(n) - nu - 1) / 2, -lower])
        row("2.29", n, [t_b, -2 * c.B(n) * log_a, -2 * st.t_d(lambda tb: tb.b_over_a(n)), t])
        below = c.A(n) ** 2 * (c.B(n - 1) - nu + 1 - 2 * n) if n >= 1 else mp.zero
        row("3.16", n, [c.B(n) * t_b, below, -c.A(n + 1) ** 2 * (c.B(n + 1) - nu - 3 - 2 * n)])
        if n == 0:
            continue
        row("2.26", n, [st.t_d(lambda tb: tb.b_over_a(n)), -c.S(n)])
        log_off = st.t_d(lambda tb: tb.A(n)) / c.A(n)
        row("2.35", n, [
            st.t2_d2(lambda tb: tb.A(n)) / c.A(n),
            -log_off ** 2,
            -(c.A(n - 1) ** 2 - 2 * c.A(n) ** 2 + c.A(n + 1) ** 2 - 2) / 2,
        ], order=2)
        row("2.36", n, [log_off, -(c.B(n - 1) - c.B(n) + 2) / 2])
        pair = c.B(n - 1) + c.B(n)
        row("3.3", n, [
            st.t_d(lambda tb: tb.B(n - 1) + tb.B(n)),
            pair * (c.B(n - 1) - c.B(n) + 1),
            -(2 * n + nu) * (c.B(n - 1) - c.B(n)),
        ])
    return entries


# ---------------------------------------------------------------------------
# Integral identities on the log-t grid
# ---------------------------------------------------------------------------

GridTerms = Tuple[List[mpf], mpf]


def _integral(g: GridTables, values: Sequence[mpf], limit: bool) -> Tuple[mpf, mpf]:
    """int f ds over the grid; with `limit` the fitted series tail below y_min is added and its bound returned."""
    total = g.grid.integral(values)
    if not limit:
        return total, mp.zero
    tail, bound = g.grid.tail(values, g.nu)
    return total + tail, bound


def _log_lead(g: GridTables, n: int, limit: bool, ctx: PrecisionContext) -> GridTerms:
    total, bound = _integral(g, [tb.E(n) for tb in g.tables], limit)
    start = limit_values(n, g.nu, LimitQuantity.A_LEAD, ctx) if limit else g.anchor.a(n)
    ratio = start * mp.exp(total / 2) / g.end.a(n)
    return [mp.one, -ratio], abs(ratio) * bound / 2


def _log_off_diagonal(g: GridTables, n: int, limit: bool, ctx: PrecisionContext) -> GridTerms:
    total, bound = _integral(g, [tb.B(n) - tb.B(n + 1) + 2 for tb in g.tables], limit)
    if limit:
        ratio = mp.sqrt((n + 1) * (n + 1 + g.nu)) * mp.exp(total / 2) / abs(g.end.A(n + 1))
        return [-mp.one, ratio], abs(ratio) * bound / 2
    ratio = g.anchor.A(n + 1) * mp.exp(total / 2) / g.end.A(n + 1)
    return [mp.one, -ratio], abs(ratio) * bound / 2


def _sub_ratio(g: GridTables, n: int, limit: bool, ctx: PrecisionContext) -> GridTerms:
    values = [tb.A(n) ** 2 * (tb.B(n - 1) - tb.B(n) + 2) / (2 * y) for tb, y in zip(g.tables, g.grid.y)]
    total, bound = _integral(g, values, limit)
    t, end = g.t, g.end
    if limit:
        return [end.b_over_a(n), -2 * t * total, end.A(n) ** 2, n * t / g.nu], 2 * t * bound
    y0 = g.grid.y_min
    return [end.b_over_a(n), -t * g.anchor.S(n) / y0, end.A(n) ** 2, -2 * t * total], mp.zero


def _diagonal(g: GridTables, n: int, limit: bool, ctx: PrecisionContext) -> GridTerms:
    c = 2 * n + g.nu + 1
    values = [(tb.A(n) ** 2 - tb.A(n + 1) ** 2 + c) / y for tb, y in zip(g.tables, g.grid.y)]
    total, bound = _integral(g, values, limit)
    t = g.t
    if limit:
        return [g.end.B(n), -c, -t * total, -t / g.nu], t * bound
    y0 = g.grid.y_min
    return [g.end.B(n), -c, -t * (g.anchor.B(n) - c) / y0, -t * total], mp.zero


def _t_slope(tb: RecurrenceTable, n: int) -> mpf:
    """t B_n'(t) from the coefficient relation, no differencing."""
    return tb.A(n) ** 2 - tb.A(n + 1) ** 2 + tb.B(n)


def _diagonal_slope(g: GridTables, n: int, limit: bool, ctx: PrecisionContext) -> GridTerms:
    def integrand(tb: RecurrenceTable, y: mpf) -> mpf:
        upper = tb.A(n + 1) ** 2 * (tb.B(n) - tb.B(n + 1) + 2)
        lower = tb.A(n) ** 2 * (tb.B(n - 1) - tb.B(n) + 2) if n >= 1 else mp.zero
        return (lower - upper) / y

    total, bound = _integral(g, [integrand(tb, y) for tb, y in zip(g.tables, g.grid.y)], limit)
    t = g.t
    if limit:
        return [_t_slope(g.end, n), -t * total, -t / g.nu], t * bound
    y0 = g.grid.y_min
    return [_t_slope(g.end, n), -t * _t_slope(g.anchor, n) / y0, -t * total], mp.zero


def _free_ratio(g: GridTables, n: int, limit: bool, ctx: PrecisionContext) -> GridTerms:
    total, bound = _integral(g, [n + tb.S(n) / tb.E(n) for tb in g.tables], limit)
    end = g.end
    ratio_t = end.free_term(n) / end.a(n)
    if limit:
        start = (-1) ** n * mp.rf(1 + g.nu, n)
    else:
        start = g.anchor.free_term(n) / g.anchor.a(n)
    value = start * mp.exp(total) / ratio_t
    return [mp.one, -value], abs(value) * bound


def _diagonal_pair(g: GridTables, n: int, limit: bool, ctx: PrecisionContext) -> GridTerms:
    nu = g.nu
    phi = [tb.B(n - 1) - tb.B(n) + 2 for tb in g.tables]
    cumulative = g.grid.cumulative(phi)
    total_phi = g.grid.integral(phi)
    phi_bound = mp.zero
    if limit:
        phi_tail, phi_bound = g.grid.tail(phi, nu)
        cumulative = [v + phi_tail for v in cumulative]
        total_phi += phi_tail
    outer = [mp.exp(big) * (tb.B(n - 1) - 2 * n - nu + 1) for big, tb in zip(cumulative, g.tables)]
    g_total, g_bound = _integral(g, outer, limit)
    damp = mp.exp(-total_phi)
    pair_t = g.end.B(n) + g.end.B(n - 1) - 2 * n - nu + 1
    if limit:
        c = 2 * n + nu + 1
        return [pair_t, -damp * (2 * g_total + c)], damp * (2 * g_bound + abs(c) * phi_bound)
    pair_0 = g.anchor.B(n) + g.anchor.B(n - 1) - 2 * n - nu + 1
    return [pair_t, -damp * (pair_0 + 2 * g_total)], mp.zero


# id -> (lowest degree, terms on one grid)
GRID_IDENTITIES: Dict[str, Tuple[int, Callable[[GridTables, int, bool, PrecisionContext], GridTerms]]] = {
    "2.16": (0, _log_lead),
    "2.18": (0, _log_off_diagonal),
    "2.32": (1, _sub_ratio),
    "2.33": (0, _diagonal),
    "2.34": (0, _diagonal_slope),
    "2.37": (1, _free_ratio),
    "3.17": (1, _diagonal_pair),
}


def _refined_entry(
    identity_id: str,
    n: int,
    ladder: GridLadder,
    terms_on: Callable[[GridTables], GridTerms],
    ctx: PrecisionContext,
) -> ResidualEntry:
    """
    Row from the finer grid of the first (P, 2P) pair whose gap is below
    OPOLY_TGRID_MAX_GAP; the gap enters the tolerance.
    """
    seen: Dict[int, GridTerms] = {}

    def on(g: GridTables) -> GridTerms:
        if g.grid.panels not in seen:
            seen[g.grid.panels] = terms_on(g)
        return seen[g.grid.panels]

    limit_gap = mp.mpf(settings.OPOLY_TGRID_MAX_GAP)
    message = f"{identity_id} at n={n}: no grid pair up to {ladder.max_panels} panels"
    for coarse, fine in ladder.pairs():
        coarse_terms, _ = on(coarse)
        terms, tail = on(fine)
        gap = abs(mp.fsum(coarse_terms) - mp.fsum(terms))
        if gap <= limit_gap * max(mp.one, magnitude(terms)):
            return residual_entry(identity_id, n, fine.nu, fine.t, terms, Method.T_GRID_INTEGRAL, ctx, gap=gap, tail=tail)
        message = f"{identity_id} at n={n}: {coarse.grid.panels} and {fine.grid.panels} panels differ by {mp.nstr(gap, 5)}"
        logger.warning(f"{message}; refining")
    raise GridTooCoarse(message)


def _grid_entry(identity_id: str, n: int, ladder: GridLadder, terms_on, ctx: PrecisionContext) -> ResidualEntry:
    try:
        return _refined_entry(identity_id, n, ladder, terms_on, ctx)
    except GridTooCoarse as exc:
        logger.error(f"Grid identity {identity_id} failed: {exc}", exc_info=True)
        return failed_entry(identity_id, n, ladder.nu, ladder.t, Method.T_GRID_INTEGRAL, ctx)


def _grid_rows(ladder: GridLadder, n_max: int, ids: Set[str], ctx: PrecisionContext) -> List[ResidualEntry]:
    limit = ladder.nu > 0
    entries = []
    for identity_id, (lowest, builder) in GRID_IDENTITIES.items():
        if identity_id not in ids:
            continue
        for n in range(lowest, n_max + 1):
            terms_on = lambda g, n=n, builder=builder: builder(g, n, limit, ctx)
            entries.append(_grid_entry(identity_id, n, ladder, terms_on, ctx))
    return entries


def check_t_relations(
    nu,
    t,
    n_max: int,
    ctx: PrecisionContext,
    *,
    ids: Optional[Iterable[str]] = None,
    stencils: Optional[StencilTables] = None,
    grids: Optional[GridLadder] = None,
) -> ResidualReport:
    """
    Relations between t-derivatives of the recurrence data, by central differences
    on the stencil tables, and their integrated forms on the log-t grid. For nu > 0
    the integrals start at 0 with the t = 0 constants; otherwise they start at the
    first grid point with values from a table built there.
    """
    wanted = set(ids) if ids is not None else FD_T_IDS | GRID_T_IDS
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        entries = []
        if wanted & FD_T_IDS:
            st = stencils or StencilTables(nu, t, n_max + 1, ctx)
            entries += _difference_rows(st, n_max, wanted, ctx)
        if wanted & GRID_T_IDS:
            ladder = grids or GridLadder(nu, t, n_max + 1, ctx)
            entries += _grid_rows(ladder, n_max, wanted, ctx)
        return _rows(entries, "t-relations")


def check_integral_difference(
    nu,
    t,
    n: int,
    samples: Sequence,
    ctx: PrecisionContext,
    *,
    grids: Optional[GridLadder] = None,
) -> ResidualReport:
    """
    P_n(x, t) against its integral representation over P_{n-1}(x, y), y <= t,
    with the Laguerre term at y = 0 for nu > 0 and the value at the first grid
    point otherwise.
    """
    if n < 1:
        raise DomainError(f"the integral-difference form needs n >= 1, got {n}")
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        ladder = grids or GridLadder(nu, t, n, ctx)
        limit = nu > 0

        def terms_at(g: GridTables, x: mpf) -> GridTerms:
            end = g.end
            beta_t = end.b_over_a(n)
            values = [
                mp.exp((beta_t - tb.b_over_a(n)) / x) * tb.S(n) * tb.free_term(n) * evaluate(tb, n - 1, x)
                / (tb.free_term(n - 1) * tb.a(n))
                for tb in g.tables
            ]
            total, bound = _integral(g, values, limit)
            scale = end.a(n) / x
            value = evaluate(end, n, x)
            if limit:
                laguerre = (
                    (-1) ** n * mp.factorial(n) * end.a(n)
                    * mp.exp((beta_t + n * (n + nu)) / x) * laguerre_eval(n, nu, x, ctx)
                )
                return [value, scale * total, -laguerre], abs(scale) * bound
            anchor = g.anchor
            start = end.a(n) * mp.exp((beta_t - anchor.b_over_a(n)) / x) * evaluate(anchor, n, x) / anchor.a(n)
            return [value, -start, scale * total], mp.zero

        entries = [
            _grid_entry("3.11", n, ladder, lambda g, x=mp.mpf(x): terms_at(g, x), ctx)
            for x in samples
        ]
        return _rows(entries, f"Integral-difference form n={n}")


# ---------------------------------------------------------------------------
# Mixed partial, second-order ODE, coefficient relations
# ---------------------------------------------------------------------------

def check_mixed_pde(
    nu,
    t,
    n_max: int,
    samples: Sequence,
    ctx: PrecisionContext,
    *,
    stencils: Optional[StencilTables] = None,
) -> ResidualReport:
    """t dP/dt + x dP/dx against the recurrence data, with both forms of the P_n coefficient."""
    with mp.workprec(ctx.bits):
        st = stencils or StencilTables(nu, t, n_max + 1, ctx)
        c, nu, t = st.center, st.nu, st.t
        entries = []
        for n in range(n_max + 1):
            log_a = st.t_d(lambda tb: tb.a(n)) / c.a(n)
            for x in samples:
                x = mp.mpf(x)
                row = evaluate_all(c, n, x)
                previous = c.A(n) * row[n - 1] if n >= 1 else mp.zero
                t_part = st.t_d(lambda tb: evaluate(tb, n, x))
                x_part = x * derivatives(c, n, x, 1)[1]
                for coefficient in (log_a + n, (c.B(n) - nu - 1) / 2):
                    entries.append(residual_entry(
                        "2.22", n, nu, t, [t_part, x_part, -coefficient * row[n], -previous],
                        Method.FINITE_DIFFERENCE, ctx,
                    ))
        return _rows(entries, "Mixed partial identity")


def check_second_order_ode(table: RecurrenceTable, samples: Sequence, ctx: PrecisionContext) -> ResidualReport:
    """The second-order equation in x in its long and reduced forms, and the scalar relations read off at x = 0."""
    with mp.workprec(ctx.bits):
        nu, t = table.nu, table.t
        floor = mp.sqrt(mp.eps)
        entries = []
        for n in range(table.n_max + 1):
            a_sq, b_n, ratio = table.A(n) ** 2, table.B(n), table.b_over_a(n)
            entries.append(residual_entry("3.1", n, nu, t, [
                table.A(n + 1) ** 2, b_n ** 2, a_sq, -(2 * n + nu + 2) * b_n, 2 * ratio, -t,
            ], Method.ALGEBRAIC, ctx))
            if n == 0:
                continue
            s_n, e_n = table.S(n), table.E(n)
            b_prev, s_prev = table.B(n - 1), table.S(n - 1)
            e_prev = b_prev - nu + 1 - 2 * n
            entries.append(residual_entry("3.2", n, nu, t, [a_sq * e_n * e_prev, -s_n ** 2, t * s_n], Method.ALGEBRAIC, ctx))
            entries.append(residual_entry("3.5", n, nu, t, [
                a_sq * e_n * e_prev, s_n * s_prev, s_n * (b_prev - 2 * n - nu + 1) * b_prev,
            ], Method.ALGEBRAIC, ctx))
            entries.append(residual_entry("3.8", n, nu, t, [
                a_sq * (b_n + b_prev - 2 * nu - 4 * n), (2 * n + nu) * s_n, -n * t,
            ], Method.ALGEBRAIC, ctx))

            def long_terms(x: mpf, p: mpf, dp: mpf, ddp: mpf) -> List[mpf]:
                e = x + e_n
                e1 = x + e_prev
                inner = e1 * (x - b_prev)
                return [
                    x ** 4 * e * ddp,
                    -x ** 2 * (x ** 2 + e * ((2 * n - 3) * x - s_n - s_prev + inner)) * dp,
                    e * a_sq * e * e1 * p,
                    e * (n * x - s_n) * ((n - 1) * x - s_prev + inner) * p,
                    -x ** 2 * (n * e_n + s_n) * p,
                ]

            def reduced_terms(x: mpf, p: mpf, dp: mpf, ddp: mpf) -> List[mpf]:
                e = x + e_n
                return [
                    x ** 2 * e * ddp,
                    -(x ** 3 + (b_n - 2 * (nu + n + 1)) * x ** 2 - (t + e_n * (nu + 2)) * x - t * e_n) * dp,
                    n * x ** 2 * p,
                    -(ratio - n * (b_n - 2 * nu - 3 * n - 1)) * x * p,
                    e_n * (a_sq - n * (n + nu + 1)) * p,
                    s_n * (2 * n + nu - b_n) * p,
                ]

            # At a common zero of P_n and its derivatives the terms are pure rounding;
            # the floor measures them against the same terms built from |a_{n,k}| at |x|.
            long_form, reduced, long_floors, reduced_floors = [], [], [], []
            for x in samples:
                x = mp.mpf(x)
                values = derivatives(table, n, x, 2)
                bounds = derivatives(table, n, x, 2, absolute=True)
                long_form.append(long_terms(x, *values))
                reduced.append(reduced_terms(x, *values))
                long_floors.append(floor * magnitude(long_terms(x, *bounds)))
                reduced_floors.append(floor * magnitude(reduced_terms(x, *bounds)))
            if long_form:
                entries.append(residual_entry("2.38", n, nu, t, worst(long_form, long_floors), Method.ALGEBRAIC, ctx))
                entries.append(residual_entry("3.6", n, nu, t, worst(reduced, reduced_floors), Method.ALGEBRAIC, ctx))
        return _rows(entries, "Second-order identities")


def check_coefficient_relations(
    nu,
    t,
    n_max: int,
    samples: Sequence,
    ctx: PrecisionContext,
    *,
    stencils: Optional[StencilTables] = None,
) -> ResidualReport:
    """
    Coefficients a_{n,k} rebuilt from t-derivatives of lower rows, and the
    recurrence rewritten with t B_n' (taken from the coefficient relation, not differenced).
    """
    with mp.workprec(ctx.bits):
        st = stencils or StencilTables(nu, t, n_max + 1, ctx)
        c, nu, t = st.center, st.nu, st.t
        entries = []
        for n in range(1, n_max + 1):
            for k in range(1, n + 1):
                terms = [c.coeffs(n)[k] / c.free_term(n)]
                for m in range(k, n + 1):
                    log_a = st.t_d(lambda tb: tb.a(m)) / c.a(m)
                    numerator = st.t_d(lambda tb: tb.coeffs(m)[k - 1]) - c.coeffs(m)[k - 1] * log_a
                    terms.append(-numerator / (st.t_d(lambda tb: tb.b_over_a(m)) * c.free_term(m)))
                entries.append(residual_entry("3.12", n, nu, t, terms, Method.FINITE_DIFFERENCE, ctx))

            s_n, e_n, b_n = c.S(n), c.E(n), c.B(n)
            s_up = c.S(n + 1)
            a_sq, a_up_sq = c.A(n) ** 2, c.A(n + 1) ** 2
            low = c.B(n - 1) - nu + 1 - 2 * n
            high = c.B(n + 1) - nu - 3 - 2 * n
            s_low = c.S(n - 1)
            recurrence_form, expanded_form = [], []
            for x in samples:
                x = mp.mpf(x)
                row = evaluate_all(c, n, x)
                p, p_prev = row[n], row[n - 1]
                p_next = evaluate(c, n + 1, x)
                lead = s_up + x / 2 * e_n
                recurrence_form.append([
                    lead * c.A(n + 1) * p_next,
                    lead * c.A(n) * p_prev,
                    x * _t_slope(c, n) * p,
                    a_sq * low * p,
                    -a_up_sq * high * p,
                    -(x - b_n) * (s_n + x / 2 * e_n) * p,
                ])
                expanded_form.append([
                    lead * c.A(n + 1) * p_next,
                    x * b_n * p,
                    a_sq * (x + low) * p,
                    -a_up_sq * (x + high) * p,
                    -(x - b_n) * (s_n + x / 2 * e_n) * p,
                    (s_low + c.B(n - 1) * low) * c.A(n) * p_prev,
                    -(b_n - x / 2) * e_n * c.A(n) * p_prev,
                ])
            if recurrence_form:
                entries.append(residual_entry("3.13", n, nu, t, worst(recurrence_form), Method.ALGEBRAIC, ctx))
                entries.append(residual_entry("3.14", n, nu, t, worst(expanded_form), Method.ALGEBRAIC, ctx))
        return _rows(entries, "Coefficient relations")


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------

def requested_ids(suite: Iterable[str]) -> List[str]:
    """Expand a suite (ids or 'all') into known identity ids, in catalogue order."""
    suite = [item.strip() for item in suite if item.strip()]
    if not suite or "all" in suite:
        return list(KNOWN_IDS)
    unknown = [item for item in suite if item not in KNOWN_IDS]
    if unknown:
        raise DomainError(f"unknown identity ids: {', '.join(unknown)}")
    return [identity_id for identity_id in KNOWN_IDS if identity_id in suite]


def locked_ids(nu, n_max: int, wanted: Iterable[str]) -> List[str]:
    """Required ids that must appear in a report for these parameters."""
    out = []
    for identity_id in wanted:
        if identity_id not in REQUIRED_IDS:
            continue
        if n_max < _MIN_N_MAX.get(identity_id, 0):
            continue
        if identity_id in _EXPANSION_IDS and not nu > -1:
            continue
        out.append(identity_id)
    return out


def run_suite(nu, t, n_max: int, suite: Iterable[str], ctx: PrecisionContext, seed: Optional[int] = None) -> ResidualReport:
    """
    Run every identity family that produces a requested id. A family that raises is
    logged and named in report.errors; required ids still missing afterwards are
    added as failing rows.
    """
    wanted = requested_ids(suite)
    wanted_set = set(wanted)
    seed = settings.OPOLY_DEFAULT_SEED if seed is None else seed
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        samples = x_samples(seed, settings.OPOLY_X_SAMPLES)
        # e^{-b_n/(x a_n)} in the integral-difference form is too steep on the t-grid below x = 1
        difference_samples = x_samples(seed, settings.OPOLY_X_SAMPLES, low=1)
        table = build(nu, t, n_max, ctx)
        shared: Dict[str, object] = {}

        def stencils() -> StencilTables:
            if "stencils" not in shared:
                shared["stencils"] = StencilTables(nu, t, n_max + 1, ctx)
            return shared["stencils"]

        def grids() -> GridLadder:
            if "grids" not in shared:
                shared["grids"] = GridLadder(nu, t, n_max + 1, ctx)
            return shared["grids"]

        def integral_difference() -> ResidualReport:
            return ResidualReport.combine(
                check_integral_difference(nu, t, n, difference_samples, ctx, grids=grids()) for n in range(1, n_max + 1)
            )

        families = [
            ("recurrence", {"1.5", "1.6", "1.16", "1.19", "1.20", "1.21", "1.22"},
             lambda: check_recurrence_identities(table, samples, ctx)),
            ("inverse-moments", {"2.1", "2.2", "2.3", "2.4"}, lambda: check_inverse_moments(table, ctx)),
            ("x-derivative", {"2.5", "2.10", "2.11"}, lambda: check_x_derivative(table, samples, ctx)),
            ("t-differences", FD_T_IDS,
             lambda: check_t_relations(nu, t, n_max, ctx, ids=wanted_set & FD_T_IDS, stencils=stencils())),
            ("t-integrals", GRID_T_IDS,
             lambda: check_t_relations(nu, t, n_max, ctx, ids=wanted_set & GRID_T_IDS, grids=grids())),
            ("mixed-partial", {"2.22"}, lambda: check_mixed_pde(nu, t, n_max, samples, ctx, stencils=stencils())),
            ("second-order", {"2.38", "3.1", "3.2", "3.5", "3.6", "3.8"},
             lambda: check_second_order_ode(table, samples, ctx)),
            ("integral-difference", {"3.11"}, integral_difference),
            ("coefficients", {"3.12", "3.13", "3.14"},
             lambda: check_coefficient_relations(nu, t, n_max, samples, ctx, stencils=stencils())),
            ("determinants", {
                "3.20", "3.22", "3.23", "3.24", "3.25", "3.26", "3.27", "3.28", "3.29", "3.31", "3.32",
                "3.36", "3.37", "3.38", "3.40", "3.41", "3.43",
            }, lambda: check_det_formulas(table, ctx)),
        ]
        if nu > -1:
            families.append(("expansion", {"4.2", "4.3", "4.10", "4.11", "4.12"}, lambda: check_expansion(table, ctx)))

        reports: List[ResidualReport] = []
        errors: List[str] = []
        for name, ids, body in families:
            if not ids & wanted_set:
                continue
            try:
                reports.append(body())
            except (OpolyError, ArithmeticError, ValueError) as exc:
                logger.error(f"Identity family {name} failed at nu={mp.nstr(nu, 8)} t={mp.nstr(t, 8)}: {exc}", exc_info=True)
                errors.append(f"{name}: {type(exc).__name__}: {exc}")

        combined = ResidualReport.combine(reports)
        entries = [entry for entry in combined.entries if entry.identity_id in wanted_set]
        present = {entry.identity_id for entry in entries}
        for identity_id in locked_ids(nu, n_max, wanted):
            if identity_id not in present:
                logger.warning(f"Identity {identity_id} produced no rows; recording it as failed")
                entries.append(failed_entry(identity_id, 0, nu, t, Method.ALGEBRAIC, ctx))

        order = {identity_id: i for i, identity_id in enumerate(KNOWN_IDS)}
        entries.sort(key=lambda e: (order[e.identity_id], e.n))
        result = ResidualReport(entries=entries, errors=combined.errors + errors)
        logger.info(
            f"Suite nu={mp.nstr(nu, 8)} t={mp.nstr(t, 8)} n_max={n_max}: "
            f"{len(result.entries)} rows, {len(result.failures())} failing, {len(result.errors)} family errors"
        )
        return result
