# File: app/services/laguerre.py

"""Classical Laguerre polynomials: the t = 0 member of the family and its limit constants."""

import logging
from typing import Any, Dict, List, Optional

from mpmath import mp, mpf

from app.core.config import settings
from app.core.errors import DomainError
from app.schemas.laguerre import LaguerreValue, LimitQuantity
from app.schemas.precision import PrecisionContext
from app.services.numerics import difference, stencil
from app.services.quadrature import jacobi_rule
from app.services.recurrence import build

logger = logging.getLogger(__name__)


def laguerre_row(n: int, nu: Any, x: Any, ctx: PrecisionContext) -> List[mpf]:
    """L_0^nu(x)..L_n^nu(x) by (k+1)L_{k+1} = (2k+nu+1-x)L_k - (k+nu)L_{k-1}."""
    if n < 0:
        raise DomainError(f"degree must be nonnegative, got {n}")
    with mp.workprec(ctx.bits):
        nu, x = mp.mpf(nu), mp.mpf(x)
        row = [mp.one]
        if n >= 1:
            row.append(1 + nu - x)
        for k in range(1, n):
            row.append(((2 * k + nu + 1 - x) * row[k] - (k + nu) * row[k - 1]) / (k + 1))
        return row


def laguerre_eval(n: int, nu: Any, x: Any, ctx: PrecisionContext) -> mpf:
    return laguerre_row(n, nu, x, ctx)[n]


def laguerre_value(n: int, nu: Any, x: Any, ctx: PrecisionContext) -> LaguerreValue:
    with mp.workprec(ctx.bits):
        return LaguerreValue(n=n, nu=nu, x=x, value=laguerre_eval(n, nu, x, ctx))


def _normalizer(n: int, nu: mpf) -> mpf:
    return mp.sqrt(mp.factorial(n) / mp.gamma(n + nu + 1))


def normalized_laguerre(n: int, nu: Any, x: Any, ctx: PrecisionContext) -> mpf:
    """(n!/Gamma(n+nu+1))^{1/2} L_n^nu(x), orthonormal for x^nu e^{-x}."""
    with mp.workprec(ctx.bits):
        nu = mp.mpf(nu)
        if not nu > -1:
            raise DomainError(f"normalized Laguerre polynomials need nu > -1, got {nu}")
        return _normalizer(n, nu) * laguerre_eval(n, nu, x, ctx)


def limit_values(n: int, nu: Any, which: LimitQuantity, ctx: Optional[PrecisionContext] = None) -> mpf:
    """Closed-form t -> 0 value of a recurrence quantity (derivatives need nu > 0)."""
    bits = ctx.bits if ctx is not None else mp.prec
    with mp.workprec(bits):
        nu = mp.mpf(nu)
        if n < 0:
            raise DomainError(f"degree must be nonnegative, got {n}")
        if not nu > -1:
            raise DomainError(f"the t = 0 limit needs nu > -1, got {nu}")
        if which.is_derivative and not nu > 0:
            raise DomainError(f"derivative limits need nu > 0, got {nu}")
        sign = (-1) ** n
        root = mp.sqrt(mp.factorial(n) * mp.gamma(n + nu + 1))
        free = mp.sqrt(mp.gamma(n + nu + 1) / mp.factorial(n)) / mp.gamma(nu + 1)
        if which is LimitQuantity.A_LEAD:
            return sign / root
        if which is LimitQuantity.B_SUB:
            if n == 0:
                return mp.zero
            return -sign * mp.sqrt(n * (n + nu) / (mp.factorial(n - 1) * mp.gamma(n + nu)))
        if which is LimitQuantity.A_OFF:
            return -mp.sqrt(n * (n + nu))
        if which is LimitQuantity.B_DIAG:
            return 2 * n + nu + 1
        if which is LimitQuantity.FREE_TERM:
            return free
        if which is LimitQuantity.A_LEAD_PRIME:
            return sign / (2 * nu * root)
        if which is LimitQuantity.B_SUB_PRIME:
            return -sign * n * (n + nu + 2) / (2 * nu * root)
        if which is LimitQuantity.B_DIAG_PRIME:
            return 1 / nu
        # a_{n,0}(t) = P_n(0, t); at n = 0 this reduces to free / (2 nu).
        return free * (2 * n + nu + 1) / (2 * nu * (nu + 1))


def laguerre_weight_gram(nu: Any, n_max: int, ctx: PrecisionContext) -> List[List[mpf]]:
    """Gram matrix of the normalized Laguerre polynomials under the (n_max+1)-point Gauss-Laguerre rule."""
    with mp.workprec(ctx.bits):
        nu = mp.mpf(nu)
        if not nu > -1:
            raise DomainError(f"the Laguerre weight needs nu > -1, got {nu}")
        m = n_max + 1
        diag = [2 * k + nu + 1 for k in range(m)]
        off = [mp.sqrt(k * (k + nu)) for k in range(1, m)]
        nodes, weights = jacobi_rule(diag, off, mp.gamma(nu + 1))
        scale = [_normalizer(k, nu) for k in range(m)]
        values = [[scale[k] * v for k, v in enumerate(laguerre_row(n_max, nu, x, ctx))] for x in nodes]
        return [
            [mp.fsum(w * v[i] * v[j] for w, v in zip(weights, values)) for j in range(m)]
            for i in range(m)
        ]


# Quantities compared by the limit pipeline.
LIMIT_VALUE_SET = [
    LimitQuantity.A_LEAD, LimitQuantity.B_SUB, LimitQuantity.A_OFF,
    LimitQuantity.B_DIAG, LimitQuantity.FREE_TERM,
]
LIMIT_DERIVATIVE_SET = [LimitQuantity.B_DIAG_PRIME, LimitQuantity.A_LEAD_PRIME, LimitQuantity.FREE_TERM_PRIME]


def _read(table, n: int, which: LimitQuantity) -> mpf:
    base = {
        LimitQuantity.A_LEAD: table.a,
        LimitQuantity.B_SUB: table.b,
        LimitQuantity.A_OFF: table.A,
        LimitQuantity.B_DIAG: table.B,
        LimitQuantity.FREE_TERM: table.free_term,
        LimitQuantity.A_LEAD_PRIME: table.a,
        LimitQuantity.B_SUB_PRIME: table.b,
        LimitQuantity.B_DIAG_PRIME: table.B,
        LimitQuantity.FREE_TERM_PRIME: table.free_term,
    }[which]
    return base(n)


def limit_comparison(nu: Any, n_max: int, ctx: PrecisionContext) -> List[Dict[str, Any]]:
    """
    Recurrence data at a tiny t against the t = 0 constants. Values come from
    one table at OPOLY_LIMIT_T; for nu > 0 the derivative set is differenced
    around OPOLY_LIMIT_DERIVATIVE_T.
    """
    with mp.workprec(ctx.bits):
        nu = mp.mpf(nu)
        if not nu > -1:
            raise DomainError(f"the t = 0 limit needs nu > -1, got {nu}")
        t_small = mp.mpf(settings.OPOLY_LIMIT_T)
        table = build(nu, t_small, n_max, ctx)
        rows = []
        for n in range(n_max + 1):
            for which in LIMIT_VALUE_SET:
                rows.append(_limit_row(n, which, limit_values(n, nu, which, ctx), _read(table, n, which)))
        if nu > 0:
            t_mid = mp.mpf(settings.OPOLY_LIMIT_DERIVATIVE_T)
            tables = [build(nu, p, n_max, ctx) for p in stencil(t_mid, 1, ctx)]
            for n in range(n_max + 1):
                for which in LIMIT_DERIVATIVE_SET:
                    estimate = difference([_read(tb, n, which) for tb in tables], t_mid, 1, ctx)
                    rows.append(_limit_row(n, which, limit_values(n, nu, which, ctx), estimate))
        logger.info(f"Limit comparison nu={mp.nstr(nu, 8)} n_max={n_max}: {len(rows)} rows")
        return rows


def _limit_row(n: int, which: LimitQuantity, limit: mpf, computed: mpf) -> Dict[str, Any]:
    return {"n": n, "quantity": which.value, "limit": limit, "computed": computed, "difference": abs(computed - limit)}
