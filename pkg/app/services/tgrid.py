# File: app/services/tgrid.py

"""
Composite Gauss-Legendre grids in s = log y on [log(t * ratio), log t], used for
the integral identities in t. Integrals are taken in the measure ds = dy / y.

Panels are graded quadratically toward y = t, where the integrands vary on the
scale of t. Below y_min the integrands follow a generalized power series in y,
which is fitted at the first nodes and integrated in closed form.
"""

import logging
from functools import lru_cache
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from mpmath import mp, mpf

from app.core.config import settings
from app.core.errors import DomainError
from app.schemas.precision import PrecisionContext
from app.schemas.recurrence import RecurrenceTable
from app.services.quadrature import jacobi_rule
from app.services.recurrence import build

logger = logging.getLogger(__name__)

TAIL_TERMS = 8


@lru_cache(maxsize=32)
def gauss_legendre(order: int, bits: int) -> Tuple[Tuple[mpf, ...], Tuple[mpf, ...]]:
    """Nodes and weights on [-1, 1] from the Legendre Jacobi matrix."""
    with mp.workprec(bits):
        off = [k / mp.sqrt(4 * k * k - 1) for k in range(1, order)]
        nodes, weights = jacobi_rule([mp.zero] * order, off, mp.mpf(2))
        return tuple(nodes), tuple(weights)


def _legendre_row(degree: int, s: mpf) -> List[mpf]:
    row = [mp.one, s]
    for m in range(1, degree):
        row.append(((2 * m + 1) * s * row[m] - m * row[m - 1]) / (m + 1))
    return row[: degree + 1]


@lru_cache(maxsize=32)
def integration_matrix(order: int, bits: int) -> Tuple[Tuple[mpf, ...], ...]:
    """
    W[j][k] such that sum_k W[j][k] f(s_k) = int_{-1}^{s_j} f for polynomials of
    degree < order, via the Legendre projection and int_{-1}^s P_m = (P_{m+1} - P_{m-1})/(2m+1).
    """
    with mp.workprec(bits):
        nodes, weights = gauss_legendre(order, bits)
        at_nodes = [_legendre_row(order, s) for s in nodes]
        matrix = []
        for s_j in nodes:
            row_j = _legendre_row(order, s_j)
            integrals = [s_j + 1] + [(row_j[m + 1] - row_j[m - 1]) / (2 * m + 1) for m in range(1, order)]
            matrix.append(tuple(
                w_k * mp.fsum((2 * m + 1) * at_nodes[k][m] * integrals[m] for m in range(order)) / 2
                for k, w_k in enumerate(weights)
            ))
        return tuple(matrix)


def tail_exponents(nu: Any, count: int) -> List[Tuple[mpf, int]]:
    """
    The first `count` terms (e, m) of y^e (log y)^m, e = i - 1 + j (nu + 1) > 0, that
    the small-y expansions of the grid integrands are built from. Integer nu adds the
    log powers m <= j of the Bessel moment series.
    """
    nu = mp.mpf(nu)
    whole = nu == mp.floor(nu)
    found: List[mpf] = []
    for j in range(count + 1):
        for i in range(count + 2):
            e = i - 1 + j * (nu + 1)
            if e > 0 and not any(mp.almosteq(e, seen, rel_eps=mp.eps * 64) for seen in found):
                found.append(e)
    terms = []
    for e in sorted(found):
        top = int(mp.floor((e + 1) / (nu + 1))) if whole else 0
        terms.extend((e, m) for m in range(top + 1))
    return terms[:count]


class LogGrid:
    """Panels of Gauss-Legendre points in s = log y, increasing in y."""

    def __init__(self, t: mpf, panels: int, order: int, ctx: PrecisionContext, ratio: Optional[Any] = None):
        if panels < 1 or order < 2:
            raise DomainError("a log grid needs at least one panel of two points")
        self.bits = ctx.bits
        self.panels, self.order = panels, order
        with mp.workprec(ctx.bits):
            self.t = mp.mpf(t)
            self.y_min = self.t * mp.mpf(ratio if ratio is not None else settings.OPOLY_TGRID_YMIN_RATIO)
            self.s_min, self.s_max = mp.log(self.y_min), mp.log(self.t)
            span = self.s_max - self.s_min
            edges = [self.s_max - span * (1 - mp.mpf(p) / panels) ** 2 for p in range(panels + 1)]
            self.widths: List[mpf] = [right - left for left, right in zip(edges, edges[1:])]
            nodes, weights = gauss_legendre(order, ctx.bits)
            self.s: List[mpf] = []
            self.weights: List[mpf] = []
            for left, width in zip(edges, self.widths):
                for x, w in zip(nodes, weights):
                    self.s.append(left + width * (1 + x) / 2)
                    self.weights.append(width * w / 2)
            self.y: List[mpf] = [mp.exp(s) for s in self.s]

    def integral(self, values: Sequence[mpf]) -> mpf:
        with mp.workprec(self.bits):
            return mp.fsum(w * v for w, v in zip(self.weights, values))

    def cumulative(self, values: Sequence[mpf]) -> List[mpf]:
        """int_{s_min}^{s_j} f ds at every node."""
        with mp.workprec(self.bits):
            matrix = integration_matrix(self.order, self.bits)
            out = []
            done = mp.zero
            for p, width in enumerate(self.widths):
                chunk = values[p * self.order: (p + 1) * self.order]
                for j in range(self.order):
                    out.append(done + width / 2 * mp.fsum(matrix[j][k] * chunk[k] for k in range(self.order)))
                done += self.integral_panel(chunk, width)
            return out

    def integral_panel(self, chunk: Sequence[mpf], width: mpf) -> mpf:
        _, weights = gauss_legendre(self.order, self.bits)
        return width / 2 * mp.fsum(w * v for w, v in zip(weights, chunk))

    def _fitted_tail(self, values: Sequence[mpf], basis: Sequence[Tuple[mpf, int]]) -> mpf:
        # in u = y / y_min, int_0^1 u^(e-1) (log u)^m du = (-1)^m m! / e^(m+1)
        size = len(basis)
        logs = [s - self.s_min for s in self.s[:size]]
        rows = [[mp.exp(e * lu) * lu ** m for e, m in basis] for lu in logs]
        coeffs = mp.lu_solve(mp.matrix(rows), mp.matrix(list(values[:size])))
        return mp.fsum(coeffs[k] * (-1) ** m * mp.factorial(m) / e ** (m + 1) for k, (e, m) in enumerate(basis))

    def tail(self, values: Sequence[mpf], nu: Any) -> Tuple[mpf, mpf]:
        """
        (tail, bound) for int_{-inf}^{s_min} f ds. The tail interpolates f at the first
        nodes by the leading terms of its small-y series; the bound is the spread
        against the fits with one and two terms fewer.
        """
        count = min(TAIL_TERMS, len(self.s))
        with mp.workprec(self.bits + 32):
            if all(v == 0 for v in values[:count]):
                return mp.zero, mp.zero
            basis = tail_exponents(nu, count)
            fits = [self._fitted_tail(values, basis[:size]) for size in (count, count - 1, count - 2) if size > 0]
        with mp.workprec(self.bits):
            tail = +fits[0]
            bound = max((abs(tail - other) for other in fits[1:]), default=abs(tail))
            return tail, bound


class GridTables:
    """Recurrence tables at the nodes of one LogGrid, plus the anchor at y_min and the end point t."""

    def __init__(self, nu: mpf, t: mpf, n_max: int, ctx: PrecisionContext, panels: int, order: Optional[int] = None):
        self.nu, self.t, self.n_max = nu, t, n_max
        self.grid = LogGrid(t, panels, order or settings.OPOLY_TGRID_ORDER, ctx)
        self.tables: List[RecurrenceTable] = [build(nu, y, n_max, ctx, seeded=True) for y in self.grid.y]
        self.anchor = build(nu, self.grid.y_min, n_max, ctx, seeded=True)
        self.end = build(nu, t, n_max, ctx)
        logger.info(f"t-grid tables: {len(self.tables)} nodes on {panels} panels, nu={mp.nstr(nu, 8)} t={mp.nstr(t, 8)}")


class GridLadder:
    """GridTables on P, 2P, 4P, ... panels, built when first asked for and kept."""

    def __init__(
        self,
        nu: mpf,
        t: mpf,
        n_max: int,
        ctx: PrecisionContext,
        panels: Optional[int] = None,
        max_panels: Optional[int] = None,
    ):
        self.nu, self.t, self.n_max, self.ctx = nu, t, n_max, ctx
        self.base = panels or settings.OPOLY_TGRID_PANELS
        self.max_panels = max(max_panels or settings.OPOLY_TGRID_MAX_PANELS, 2 * self.base)
        self._grids: Dict[int, GridTables] = {}

    def grid(self, panels: int) -> GridTables:
        if panels not in self._grids:
            self._grids[panels] = GridTables(self.nu, self.t, self.n_max, self.ctx, panels)
        return self._grids[panels]

    def pairs(self) -> Iterator[Tuple[GridTables, GridTables]]:
        """(P, 2P) from the base panel count up to the cap."""
        panels = self.base
        while 2 * panels <= self.max_panels:
            yield self.grid(panels), self.grid(2 * panels)
            panels *= 2
