import pytest
from mpmath import mp

from app.core.errors import DomainError
from app.services.expansion import (
    TRUNCATION_INTERVAL,
    TRUNCATION_SAMPLES,
    TRUNCATION_TERMS,
    bound_entry,
    check_expansion_recurrences,
    d_coeff,
    expansion_coeffs,
    generating_norm,
    generating_partial,
    lemma2_bound,
    parseval_check,
    rodrigues_truncation,
    series_coeffs,
    truncation_entry,
)
from app.services.numerics import default_context
from app.services.recurrence import build


def test_low_coefficients_vanish_and_diagonal_is_closed_form(half_table, ctx20):
    coeffs = expansion_coeffs(half_table, 2, 4, ctx20)
    with mp.workprec(ctx20.bits):
        assert abs(coeffs.d[0]) < mp.mpf(10) ** -15
        assert abs(coeffs.d[1]) < mp.mpf(10) ** -15
        want = 1 / (mp.gamma(2 + half_table.nu + 1) * half_table.a(2))
        assert abs(coeffs.d[2] - want) < mp.mpf(10) ** -15 * abs(want)
        assert abs(d_coeff(half_table, 2, 3, ctx20) - coeffs.d[3]) < mp.mpf(10) ** -15


def test_small_t_diagonal_coefficient(ctx20):
    table = build("0.5", "1e-24", 1, ctx20)
    with mp.workprec(ctx20.bits):
        want = mp.sqrt(1 / mp.gamma(mp.mpf("2.5")))
        assert abs(d_coeff(table, 1, 1, ctx20) - want) < mp.mpf(10) ** -8


def test_coefficients_respect_the_bound(half_table, ctx20):
    coeffs = expansion_coeffs(half_table, 1, 12, ctx20)
    assert coeffs.h_bound == lemma2_bound(half_table, 1, ctx20)
    assert bound_entry(coeffs, ctx20).passed


def test_coefficient_recurrences(half_table, ctx20):
    coeffs = {n: expansion_coeffs(half_table, n, 10, ctx20) for n in range(3)}
    result = check_expansion_recurrences(half_table, coeffs, ctx20)
    assert {"4.11", "4.12"} <= set(result.ids())
    assert max(e.n for e in result.entries) == 1
    assert result.all_passed, [(e.identity_id, e.n) for e in result.failures()]


def test_series_coefficients_match_quadrature(half_table, ctx20):
    for n in range(3):
        quadrature = expansion_coeffs(half_table, n, 12, ctx20).d
        series = series_coeffs(half_table, n, 12, ctx20)
        with mp.workprec(ctx20.bits):
            assert all(abs(a - b) < mp.mpf(10) ** -15 for a, b in zip(quadrature, series))


def test_parseval(half_table, ctx20):
    coeffs = expansion_coeffs(half_table, 0, 30, ctx20)
    assert parseval_check(half_table, coeffs, ctx20).passed


@pytest.mark.parametrize("nu,t", [("0.5", 1), ("0.5", "0.5"), ("-0.5", "0.5")])
def test_parseval_with_few_quadrature_coefficients(nu, t):
    ctx = default_context(30, 3)
    table = build(nu, t, 3, ctx)
    for n in range(4):
        entry = parseval_check(table, expansion_coeffs(table, n, 11, ctx), ctx)
        assert entry.passed, (n, entry.residual, entry.tolerance)


def test_truncation_needs_nu_above_three_halves(ctx20):
    table = build(1, 1, 1, ctx20)
    with pytest.raises(DomainError):
        rodrigues_truncation(table, 1, 10, ["1"], ctx20)


def test_truncation_error_decreases(ctx20):
    table = build(2, 1, 1, ctx20)
    result = rodrigues_truncation(table, 1, 20, ["0.5", "2", "5"], ctx20)
    assert result.decreased
    assert truncation_entry(table, result, ctx20).passed


def test_truncation_error_decreases_on_the_suite_samples(ctx20):
    table = build(2, 2, 1, ctx20)
    with mp.workprec(ctx20.bits):
        lo, hi = (mp.mpf(v) for v in TRUNCATION_INTERVAL)
        points = mp.linspace(lo, hi, TRUNCATION_SAMPLES)
    result = rodrigues_truncation(table, 1, TRUNCATION_TERMS, points, ctx20)
    assert result.decreased
    assert truncation_entry(table, result, ctx20).passed


def test_expansion_rejects_nu_at_minus_one(ctx20):
    table = build("-1.5", 1, 1, ctx20)
    with pytest.raises(DomainError):
        expansion_coeffs(table, 0, 3, ctx20)


def test_generating_partial_sums():
    ctx = default_context(20, 12)
    table = build("0.5", 1, 12, ctx)
    with mp.workprec(ctx.bits):
        head = generating_partial(table, "1.3", 1, 0, ctx)
        assert head.value == table.a(0)
        partial = generating_partial(table, "1.3", 1, 12, ctx)
        assert partial.tail_norm < mp.mpf("2.1e-10")
        norm = generating_norm(table, 1, 12, ctx)
        want = mp.fsum(1 / mp.factorial(n) ** 2 for n in range(13))
        assert abs(norm - want) < mp.mpf(10) ** -12
        with pytest.raises(DomainError):
            generating_partial(table, 1, 3, 2, ctx)
