# File: app/services/residuals.py

"""Turning the terms of an identity into report rows."""

import logging
from itertools import repeat
from typing import Any, Iterable, List, Optional, Sequence

from mpmath import mp, mpf

from app.schemas.precision import PrecisionContext
from app.schemas.report import Method, ResidualEntry, ResidualReport
from app.services.numerics import tolerance_for

logger = logging.getLogger(__name__)


def _finite(value: mpf) -> bool:
    return not (mp.isnan(value) or mp.isinf(value))


def magnitude(terms: Sequence[Any]) -> mpf:
    return max([abs(mp.mpf(v)) for v in terms] or [mp.zero])


def normalized(terms: Sequence[Any], floor: Any = 0) -> List[mpf]:
    """
    Terms divided by max(largest magnitude, floor); all-zero terms with a zero floor
    are returned unchanged.
    """
    scale = max(magnitude(terms), abs(mp.mpf(floor)))
    if scale == 0:
        return [mp.mpf(v) for v in terms]
    return [mp.mpf(v) / scale for v in terms]


def worst(term_sets: Iterable[Sequence[Any]], floors: Optional[Iterable[Any]] = None) -> List[mpf]:
    """
    Among several normalized term lists, the one whose sum is largest in magnitude.
    floors, when given, pairs one normalization floor with each list.
    """
    chosen: List[mpf] = [mp.zero]
    largest = mp.mpf(-1)
    floors = repeat(0) if floors is None else floors
    for terms, floor in zip(term_sets, floors):
        scaled = normalized(terms, floor)
        total = abs(mp.fsum(scaled))
        if not _finite(total):
            return scaled
        if total > largest:
            largest, chosen = total, scaled
    return chosen


def residual_entry(
    identity_id: str,
    n: int,
    nu: Any,
    t: Any,
    terms: Sequence[Any],
    method: Method,
    ctx: PrecisionContext,
    *,
    order: int = 1,
    gap: Any = 0,
    tail: Any = 0,
) -> ResidualEntry:
    """
    Row for an identity written as sum(terms) = 0: residual |sum|, tolerance
    scaled by the largest term (floored at 1).
    """
    with mp.workprec(ctx.bits):
        values = [mp.mpf(v) for v in terms]
        residual = abs(mp.fsum(values))
        if not _finite(residual):
            residual = mp.inf
        tolerance = tolerance_for(method, ctx, magnitude(values), order=order, gap=gap, tail=tail)
        return ResidualEntry(
            identity_id=identity_id, n=n, nu=nu, t=t,
            residual=residual, tolerance=tolerance, method=method,
        )


def failed_entry(identity_id: str, n: int, nu: Any, t: Any, method: Method, ctx: PrecisionContext) -> ResidualEntry:
    """Row for an identity that could not be evaluated."""
    with mp.workprec(ctx.bits):
        return ResidualEntry(
            identity_id=identity_id, n=n, nu=nu, t=t,
            residual=mp.inf, tolerance=tolerance_for(method, ctx), method=method,
        )


def report(entries: Iterable[ResidualEntry]) -> ResidualReport:
    """One row per (id, n): repeated rows collapse to the one with the largest residual/tolerance."""
    best = {}
    order = []
    for entry in entries:
        key = (entry.identity_id, entry.n)
        if key not in best:
            order.append(key)
            best[key] = entry
        elif entry.residual / entry.tolerance > best[key].residual / best[key].tolerance:
            best[key] = entry
    return ResidualReport(entries=[best[key] for key in order])
