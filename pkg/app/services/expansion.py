# File: app/services/expansion.py

"""
Laguerre expansion of exp(-t/x) P_n(x, t):

    exp(-t/x) P_n(x, t) = sum_{k >= n} d_{n,k}(t) L_k^nu(x),
    d_{n,k} = k!/Gamma(k+nu+1) int_0^inf e^{-x-t/x} P_n(x, t) L_k^nu(x) x^nu dx,

with the coefficient bound, the two recurrences in (n, k), the truncation error
of the series and partial sums of the exponential generating function.
"""

import logging
import math
from typing import Dict, List, Sequence

from mpmath import mp, mpf

from app.core.errors import DomainError
from app.schemas.expansion import ExpansionCoeffs, GeneratingPartial, TruncationResult
from app.schemas.precision import LOG10_2, PrecisionContext
from app.schemas.recurrence import RecurrenceTable
from app.schemas.report import Method, ResidualEntry, ResidualReport
from app.services.laguerre import laguerre_row
from app.services.numerics import integrate_halfline, integrate_halfline_batch, integrate_interval, tolerance_for
from app.services.quadrature import gauss_rule
from app.services.recurrence import evaluate, evaluate_all
from app.services.residuals import report, residual_entry
from app.services.rho import rho

logger = logging.getLogger(__name__)

# Truncation row of the suite: equally spaced abscissae on [0.5, 5].
TRUNCATION_INTERVAL = ("0.5", "5")
TRUNCATION_SAMPLES = 41
TRUNCATION_TERMS = 20
PARSEVAL_MAX_DEGREE = 3
PARSEVAL_START_TERMS = 64
PARSEVAL_MAX_TERMS = 1 << 16


def _check_degree(table: RecurrenceTable, n: int) -> None:
    if not table.nu > -1:
        raise DomainError(f"Laguerre expansions need nu > -1, got {mp.nstr(table.nu, 8)}")
    if not 0 <= n <= table.n_max:
        raise DomainError(f"degree {n} outside 0..{table.n_max}")


def _scale(k: int, nu: mpf) -> mpf:
    return mp.factorial(k) / mp.gamma(k + nu + 1)


def d_coeff(table: RecurrenceTable, n: int, k: int, ctx: PrecisionContext) -> mpf:
    """One coefficient d_{n,k}(t) by double-exponential quadrature."""
    _check_degree(table, n)
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    with mp.workprec(ctx.bits):
        nu, t = table.nu, table.t

        def f(x: mpf) -> mpf:
            return mp.exp(-x - t / x) * x ** nu * evaluate(table, n, x) * laguerre_row(k, nu, x, ctx)[k]

        return _scale(k, nu) * integrate_halfline(f, ctx).value


def lemma2_bound(table: RecurrenceTable, n: int, ctx: PrecisionContext) -> mpf:
    """
    h_n(t) = 2^{nu+1/2} int_0^{sqrt t} Q_n(t - u^2) rho_{2nu+1}(2u^2)^{1/2} du,
    Q_n(x) = sum_m |a_{n,m}| x^m / m!, at no more than 20 digits.
    """
    _check_degree(table, n)
    bound_ctx = ctx.with_digits(min(ctx.target_digits, 20))
    with mp.workprec(ctx.bits):
        nu, t = table.nu, table.t
        weights = [abs(c) / mp.factorial(m) for m, c in enumerate(table.coeffs(n))]

        def q(x: mpf) -> mpf:
            return mp.fsum(w * x ** m for m, w in enumerate(weights))

        def f(u: mpf) -> mpf:
            return q(t - u * u) * mp.sqrt(rho(2 * nu + 1, 2 * u * u, bound_ctx))

        value = mp.mpf(2) ** (nu + mp.mpf(1) / 2) * integrate_interval(f, 0, mp.sqrt(t), bound_ctx).value
        logger.debug(f"coefficient bound h_{n}={mp.nstr(value, 10)} at nu={mp.nstr(nu, 8)} t={mp.nstr(t, 8)}")
        return value


def expansion_coeffs(table: RecurrenceTable, n: int, k_max: int, ctx: PrecisionContext) -> ExpansionCoeffs:
    """d_{n,0..k_max} from one vector quadrature, with the bound h_n."""
    _check_degree(table, n)
    if k_max < 0:
        raise DomainError(f"k_max must be nonnegative, got {k_max}")
    with mp.workprec(ctx.bits):
        nu, t = table.nu, table.t

        def f(x: mpf) -> List[mpf]:
            carrier = mp.exp(-x - t / x) * x ** nu * evaluate(table, n, x)
            return [carrier * value for value in laguerre_row(k_max, nu, x, ctx)]

        integrals = integrate_halfline_batch(f, ctx)
        d = [_scale(k, nu) * r.value for k, r in enumerate(integrals)]
        logger.info(f"Expansion coefficients n={n} k<={k_max} at nu={mp.nstr(nu, 8)} t={mp.nstr(t, 8)}")
        return ExpansionCoeffs(nu=nu, t=t, n=n, k_max=k_max, d=d, h_bound=lemma2_bound(table, n, ctx))


def bound_entry(coeffs: ExpansionCoeffs, ctx: PrecisionContext) -> ResidualEntry:
    """Row "4.3": max_k |d_{n,k}| Gamma(k+nu+1)/k! against h_n."""
    with mp.workprec(ctx.bits):
        largest = max(abs(v) / _scale(k, coeffs.nu) for k, v in enumerate(coeffs.d))
        slack = mp.mpf(10) ** (-mp.mpf(ctx.target_digits) / 2)
        return ResidualEntry(
            identity_id="4.3", n=coeffs.n, nu=coeffs.nu, t=coeffs.t,
            residual=largest, tolerance=coeffs.h_bound * (1 + slack) + slack,
            method=Method.QUADRATURE,
        )


def _largest(term_sets: Sequence[List[mpf]]) -> List[mpf]:
    chosen, size = [mp.zero], mp.mpf(-1)
    for terms in term_sets:
        total = abs(mp.fsum(terms))
        if total > size:
            chosen, size = terms, total
    return chosen


def check_expansion_recurrences(
    table: RecurrenceTable,
    coeffs: Dict[int, ExpansionCoeffs],
    ctx: PrecisionContext,
) -> ResidualReport:
    """
    The three-term relation in n at fixed k, and the mixed relation in (n, k),
    for every n whose neighbour n + 1 is present. Absent lower degrees count as zero.
    One row per n keeps the k with the largest residual.
    """
    with mp.workprec(ctx.bits):
        nu, t = table.nu, table.t
        entries = []

        def d(n: int, k: int) -> mpf:
            if n < 0 or n not in coeffs or k < 0:
                return mp.zero
            return coeffs[n].d[k]

        for n in sorted(coeffs):
            if n + 1 not in coeffs:
                continue
            k_top = min(coeffs[n].k_max, coeffs[n + 1].k_max) - 1
            a_up, a_n, b_n = table.A(n + 1), table.A(n), table.B(n)
            three_term, mixed = [], []
            for k in range(k_top + 1):
                three_term.append([
                    (2 * k + nu + 1 - b_n) * d(n, k),
                    -a_up * d(n + 1, k),
                    -(k + nu + 1) * d(n, k + 1),
                    -a_n * d(n - 1, k),
                    -k * d(n, k - 1),
                ])
                terms = [
                    (k + nu + 1) * a_up * d(n + 1, k + 1),
                    (k + nu + 1) * b_n * d(n, k + 1),
                    (n - k + 1) * a_up * d(n + 1, k),
                    (n - k + 1) * b_n * d(n, k),
                    (t - table.b_over_a(n)) * d(n, k),
                ]
                if n >= 1:
                    terms += [
                        (k + nu + 1) * a_n * d(n - 1, k + 1),
                        (n - k + 1) * a_n * d(n - 1, k),
                        a_n * (table.B(n - 1) + table.E(n)) * d(n - 1, k),
                        a_n * table.A(n - 1) * d(n - 2, k),
                    ]
                mixed.append(terms)
            entries.append(residual_entry("4.11", n, nu, t, _largest(three_term), Method.QUADRATURE, ctx))
            entries.append(residual_entry("4.12", n, nu, t, _largest(mixed), Method.QUADRATURE, ctx))
        return report(entries)


def _series_context(ctx: PrecisionContext) -> PrecisionContext:
    """ctx with D/2 + 10 more digits and the bits to carry them."""
    extra = ctx.target_digits // 2 + 10
    bits = ctx.bits + math.ceil(extra / LOG10_2) + 64
    return ctx.with_bits(bits).with_digits(ctx.target_digits + extra)


def _norms(k_max: int, nu: mpf) -> List[mpf]:
    """Gamma(k+nu+1)/k! for k = 0..k_max."""
    out = [mp.gamma(nu + 1)]
    for k in range(k_max):
        out.append(out[-1] * (k + nu + 1) / (k + 1))
    return out


def series_coeffs(table: RecurrenceTable, n: int, k_max: int, ctx: PrecisionContext) -> List[mpf]:
    """
    d_{n,0..k_max} from two moments instead of quadrature.

    c_k = int e^{-x-t/x} x^nu L_k^nu(x) dx are the Taylor coefficients of
    rho_{nu+1}(t/(1-w)) and satisfy

        (k+2)(k+1) c_{k+2} = (k+1)(3k+nu+2) c_{k+1} + (t - k(3k+2nu+1)) c_k + (k-1)(k+nu) c_{k-1}

    with c_0 = rho_{nu+1}(t), c_1 = -t rho_nu(t). Higher powers x^m follow from
    x L_k = (2k+nu+1) L_k - (k+1) L_{k+1} - (k+nu) L_{k-1}. The c_k are the minimal
    solution of the recurrence, so it runs with D/2 + 10 extra digits.
    """
    _check_degree(table, n)
    if k_max < 0:
        raise DomainError(f"k_max must be nonnegative, got {k_max}")
    hi = _series_context(ctx)
    with mp.workprec(hi.bits):
        nu, t = table.nu, table.t
        top = k_max + n + 1
        c = [rho(nu + 1, t, hi), -t * rho(nu, t, hi)]
        for k in range(top - 1):
            below = c[k - 1] if k >= 1 else mp.zero
            c.append((
                (k + 1) * (3 * k + nu + 2) * c[k + 1]
                + (t - k * (3 * k + 2 * nu + 1)) * c[k]
                + (k - 1) * (k + nu) * below
            ) / ((k + 2) * (k + 1)))
        powers = [c]
        for _ in range(n):
            row = powers[-1]
            powers.append([
                (2 * k + nu + 1) * row[k] - (k + 1) * row[k + 1] - (k + nu) * (row[k - 1] if k >= 1 else mp.zero)
                for k in range(len(row) - 1)
            ])
        weights = table.coeffs(n)
        norms = _norms(k_max, nu)
        d = [mp.fsum(weights[m] * powers[m][k] for m in range(n + 1)) / norms[k] for k in range(k_max + 1)]
    with mp.workprec(ctx.bits):
        return [+v for v in d]


def parseval_check(table: RecurrenceTable, coeffs: ExpansionCoeffs, ctx: PrecisionContext) -> ResidualEntry:
    """
    Row "4.2": sum_k d_{n,k}^2 Gamma(k+nu+1)/k! against int e^{-2t/x} P_n^2 x^nu e^{-x} dx.

    Terms up to coeffs.k_max use the quadrature coefficients, later ones series_coeffs.
    K doubles until the terms in (K/2, K] add up to less than the quadrature tolerance;
    that block sum is the tail allowance.
    """
    with mp.workprec(ctx.bits):
        nu, t, n = table.nu, table.t, coeffs.n
        direct = integrate_halfline(
            lambda x: mp.exp(-x - 2 * t / x) * x ** nu * evaluate(table, n, x) ** 2, ctx,
        ).value
        base = tolerance_for(Method.QUADRATURE, ctx, abs(direct))
        head = [v * v / _scale(k, nu) for k, v in enumerate(coeffs.d)]
        K = max(PARSEVAL_START_TERMS, 2 * (coeffs.k_max + 1))
        while True:
            norms = _norms(K, nu)
            d = series_coeffs(table, n, K, ctx)
            terms = head + [d[k] ** 2 * norms[k] for k in range(len(head), K + 1)]
            block = mp.fsum(terms[K // 2 + 1:])
            if block <= base:
                break
            if 2 * K > PARSEVAL_MAX_TERMS:
                logger.warning(
                    f"Parseval series for n={n} at nu={mp.nstr(nu, 8)} t={mp.nstr(t, 8)} "
                    f"still adds {mp.nstr(block, 5)} in its last block at K={K}"
                )
                break
            K *= 2
        total = mp.fsum(terms)
        logger.debug(f"Parseval n={n}: {K + 1} terms, tail allowance {mp.nstr(block, 5)}")
        return ResidualEntry(
            identity_id="4.2", n=n, nu=nu, t=t,
            residual=abs(total - direct),
            tolerance=tolerance_for(Method.QUADRATURE, ctx, max(abs(total), abs(direct))) + block,
            method=Method.QUADRATURE,
        )


def rodrigues_truncation(
    table: RecurrenceTable,
    n: int,
    K: int,
    samples: Sequence,
    ctx: PrecisionContext,
) -> TruncationResult:
    """
    |exp(-t/x) P_n(x, t) - sum_{k<=K'} d_{n,k} L_k(x)| maximized over the samples and over
    K <= K' < 2K (sup_error_K), and the same over 2K <= K' < 4K (sup_error_2K).
    The series converges uniformly on closed intervals only for nu > 3/2.
    """
    _check_degree(table, n)
    if not table.nu > mp.mpf(3) / 2:
        raise DomainError(f"uniform convergence of the Laguerre series needs nu > 3/2, got {mp.nstr(table.nu, 8)}")
    if K < 1:
        raise DomainError(f"K must be positive, got {K}")
    with mp.workprec(ctx.bits):
        nu, t = table.nu, table.t
        d = series_coeffs(table, n, 4 * K, ctx)
        errors_k, errors_2k = [], []
        for x in samples:
            x = mp.mpf(x)
            target = mp.exp(-t / x) * evaluate(table, n, x)
            row = laguerre_row(4 * K, nu, x, ctx)
            partial = mp.fsum(d[k] * row[k] for k in range(K))
            for k in range(K, 4 * K):
                partial += d[k] * row[k]
                (errors_k if k < 2 * K else errors_2k).append(abs(target - partial))
        return TruncationResult(n=n, K=K, sup_error_K=max(errors_k), sup_error_2K=max(errors_2k))


def truncation_entry(table: RecurrenceTable, result: TruncationResult, ctx: PrecisionContext) -> ResidualEntry:
    """Row "4.10": passes when doubling the number of terms lowers the sup error."""
    with mp.workprec(ctx.bits):
        floor = mp.mpf(10) ** (-ctx.target_digits)
        return ResidualEntry(
            identity_id="4.10", n=result.n, nu=table.nu, t=table.t,
            residual=result.sup_error_2K, tolerance=max(result.sup_error_K, floor),
            method=Method.QUADRATURE,
        )


def _check_generating(table: RecurrenceTable, w: mpf, N: int) -> None:
    if abs(w) > 2:
        raise DomainError(f"generating sums are taken for |w| <= 2, got {mp.nstr(w, 8)}")
    if not 0 <= N <= table.n_max:
        raise DomainError(f"N must lie in 0..{table.n_max}, got {N}")


def generating_partial(table: RecurrenceTable, x, w, N: int, ctx: PrecisionContext) -> GeneratingPartial:
    """sum_{n<=N} P_n(x, t) w^n/n! and the bound sum_{n>N} |w|^n/n! on the L2 norm of the rest."""
    with mp.workprec(ctx.bits):
        x, w = mp.mpf(x), mp.mpf(w)
        _check_generating(table, w, N)
        row = evaluate_all(table, N, x)
        value = mp.fsum(row[n] * w ** n / mp.factorial(n) for n in range(N + 1))
        tail = mp.exp(abs(w)) - mp.fsum(abs(w) ** n / mp.factorial(n) for n in range(N + 1))
        return GeneratingPartial(value=value, tail_norm=max(tail, mp.zero), N=N)


def generating_norm(table: RecurrenceTable, w, N: int, ctx: PrecisionContext) -> mpf:
    """Squared L2 norm of the partial sum under the (N+1)-point Gauss rule, exact for its degree 2N."""
    with mp.workprec(ctx.bits):
        w = mp.mpf(w)
        _check_generating(table, w, N)
        rule = gauss_rule(table, N + 1, ctx)
        total = []
        for node, weight in zip(rule.nodes, rule.weights):
            row = evaluate_all(table, N, node)
            total.append(weight * mp.fsum(row[n] * w ** n / mp.factorial(n) for n in range(N + 1)) ** 2)
        return mp.fsum(total)


def check_expansion(table: RecurrenceTable, ctx: PrecisionContext) -> ResidualReport:
    """
    Expansion rows for the suite: the bound for every n, the recurrences for n < n_max,
    Parseval for n <= 3 and, when nu > 3/2, the truncation decay at n = min(1, n_max).
    """
    _check_degree(table, 0)
    with mp.workprec(ctx.bits):
        k_max = table.n_max + 8
        coeffs = {n: expansion_coeffs(table, n, k_max, ctx) for n in range(table.n_max + 1)}
        entries = [bound_entry(c, ctx) for c in coeffs.values()]
        entries += check_expansion_recurrences(table, coeffs, ctx).entries
        entries += [parseval_check(table, coeffs[n], ctx) for n in range(min(PARSEVAL_MAX_DEGREE, table.n_max) + 1)]
        if table.nu > mp.mpf(3) / 2:
            n = min(1, table.n_max)
            points = mp.linspace(mp.mpf(TRUNCATION_INTERVAL[0]), mp.mpf(TRUNCATION_INTERVAL[1]), TRUNCATION_SAMPLES)
            result = rodrigues_truncation(table, n, TRUNCATION_TERMS, points, ctx)
            entries.append(truncation_entry(table, result, ctx))
        result = report(entries)
        logger.info(f"Expansion identities: {len(result.entries)} rows, {len(result.failures())} failing")
        return result
