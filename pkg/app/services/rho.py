# File: app/services/rho.py

"""
Moments rho_nu(t) = int_0^inf x^{nu-1} exp(-x - t/x) dx of the weight and
their three-term structure rho_{nu+1} = nu rho_nu + t rho_{nu-1}.
"""

import logging
import threading
from collections import OrderedDict
from typing import Any, List, Optional, Tuple

from mpmath import mp, mpf

from app.core.config import settings
from app.core.errors import DomainError, RecurrenceViolation
from app.schemas.moments import MomentTable
from app.schemas.precision import DerivativeCheck, PrecisionContext
from app.schemas.report import Method
from app.services.numerics import (
    central_difference,
    integrate_halfline,
    integrate_halfline_batch,
    tolerance_for,
)

logger = logging.getLogger(__name__)

CacheKey = Tuple[Any, Any, int, int]

_cache: "OrderedDict[CacheKey, mpf]" = OrderedDict()
_cache_lock = threading.Lock()


def _get_from_cache(cache_key: CacheKey) -> Optional[mpf]:
    with _cache_lock:
        value = _cache.get(cache_key)
        if value is not None:
            _cache.move_to_end(cache_key)
    if value is not None:
        logger.debug(f"Cache hit for key: {cache_key}")
    return value


def _set_to_cache(cache_key: CacheKey, value: mpf) -> None:
    with _cache_lock:
        _cache[cache_key] = value
        _cache.move_to_end(cache_key)
        while len(_cache) > settings.OPOLY_RHO_CACHE_SIZE:
            _cache.popitem(last=False)


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()


def _check_t(t: mpf) -> None:
    if not t > 0:
        raise DomainError(f"rho needs t > 0, got {t}")


def _integrands(indices: List[mpf], t: mpf):
    def f(x: mpf) -> List[mpf]:
        log_x = mp.log(x)
        base = -x - t / x
        return [mp.exp(base + (mu - 1) * log_x) for mu in indices]
    return f


def _quadrature(indices: List[mpf], t: mpf, ctx: PrecisionContext) -> List[mpf]:
    """rho_mu(t) for each mu, memoised per (mu, t, bits, digits); misses share one quadrature."""
    keys = [(mu, t, ctx.bits, ctx.target_digits) for mu in indices]
    found = [_get_from_cache(key) for key in keys]
    missing = [i for i, v in enumerate(found) if v is None]
    if missing:
        results = integrate_halfline_batch(_integrands([indices[i] for i in missing], t), ctx)
        for i, result in zip(missing, results):
            found[i] = result.value
            _set_to_cache(keys[i], result.value)
    return found


def rho(nu: Any, t: Any, ctx: PrecisionContext) -> mpf:
    """rho_nu(t) by double-exponential quadrature; defined for every real nu when t > 0."""
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        _check_t(t)
        return _quadrature([nu], t, ctx)[0]


def moment_table(
    nu: Any,
    t: Any,
    k_min: int,
    k_max: int,
    ctx: PrecisionContext,
    *,
    seeded: bool = False,
) -> MomentTable:
    """
    rho_{nu+k}(t) for k_min <= k <= k_max.

    Direct mode integrates every index and self-checks the three-term recurrence
    at relative tolerance 10^{-D+5}. Seeded mode integrates the two lowest indices
    with nu + k >= 0 (and everything below them) and fills the rest upward, where
    all terms of the recurrence are positive.
    """
    if k_min > k_max:
        raise DomainError(f"empty moment range [{k_min}, {k_max}]")
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        _check_t(t)
        ks = list(range(k_min, k_max + 1))
        if not seeded:
            values = _quadrature([nu + k for k in ks], t, ctx)
            _self_check(nu, t, ks, values, ctx)
        else:
            first_nonneg = next((k for k in ks if nu + k >= 0), None)
            if first_nonneg is None:
                direct = ks
            else:
                direct = [k for k in ks if k <= first_nonneg + 1]
            values = _quadrature([nu + k for k in direct], t, ctx)
            for k in ks[len(direct):]:
                mu = nu + k - 1
                values.append(mu * values[-1] + t * values[-2])
        logger.debug(f"moment table nu={mp.nstr(nu, 8)} t={mp.nstr(t, 8)} k=[{k_min},{k_max}] seeded={seeded}")
        return MomentTable(nu=nu, t=t, k_min=k_min, k_max=k_max, values=values)


def _self_check(nu: mpf, t: mpf, ks: List[int], values: List[mpf], ctx: PrecisionContext) -> None:
    tolerance = mp.mpf(10) ** (5 - ctx.target_digits)
    for i in range(1, len(ks) - 1):
        mu = nu + ks[i]
        terms = (values[i + 1], mu * values[i], t * values[i - 1])
        residual = abs(terms[0] - terms[1] - terms[2])
        if residual > tolerance * max(abs(v) for v in terms):
            raise RecurrenceViolation(
                f"rho_{mp.nstr(mu + 1, 8)}({mp.nstr(t, 8)}) breaks the moment recurrence: "
                f"relative residual {mp.nstr(residual / terms[0], 5)}"
            )


def rho_derivative(nu: Any, t: Any, order: int, ctx: PrecisionContext) -> mpf:
    """d^n/dt^n rho_nu(t) = (-1)^n rho_{nu-n}(t)."""
    if order < 0:
        raise DomainError(f"derivative order must be nonnegative, got {order}")
    with mp.workprec(ctx.bits):
        return (-1) ** order * rho(mp.mpf(nu) - order, t, ctx)


def check_rho_derivative(nu: Any, t: Any, order: int, ctx: PrecisionContext) -> DerivativeCheck:
    """Exact derivative formula against a central difference of rho itself."""
    if order not in (1, 2):
        raise DomainError(f"difference check supports orders 1 and 2, got {order}")
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        exact = rho_derivative(nu, t, order, ctx)
        estimate = central_difference(lambda s: rho(nu, s, ctx), t, order, ctx)
        # Compare t^order f^(order), the dimensionless form.
        scaled_exact, scaled_estimate = exact * t ** order, estimate * t ** order
        residual = abs(scaled_exact - scaled_estimate)
        scale = max(abs(scaled_exact), rho(nu, t, ctx))
        tolerance = tolerance_for(Method.FINITE_DIFFERENCE, ctx, scale, order=order)
        return DerivativeCheck(
            order=order,
            exact=exact,
            estimate=estimate,
            residual=residual,
            tolerance=tolerance,
            passed=bool(residual < tolerance),
        )


def check_fractional_identity(nu: Any, t: Any, ctx: PrecisionContext) -> mpf:
    """|rho_{nu+1}(t) - int_t^inf rho_nu(x) dx|, the outer integral taken over x = t + y."""
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        _check_t(t)
        outer = integrate_halfline(lambda y: rho(nu, t + y, ctx), ctx, finite_at_zero=True)
        return abs(rho(nu + 1, t, ctx) - outer.value)
