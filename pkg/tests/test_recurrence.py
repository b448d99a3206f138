import pytest
from mpmath import mp

from app.core.config import settings
from app.core.errors import DomainError
from app.services.recurrence import (
    build,
    christoffel_darboux,
    derivatives,
    determinant_eval,
    evaluate,
    free_term_product,
    table_invariant_violations,
)
from app.services.rho import rho


def test_closed_form_anchor(anchor_table, ctx30, sqrt_pi_e2):
    with mp.workprec(ctx30.bits):
        assert abs(anchor_table.B(0) - mp.mpf("1.5")) < mp.mpf(10) ** -27
        assert abs(anchor_table.A(1) + 1) < mp.mpf(10) ** -27
        assert abs(anchor_table.a(0) - 1 / mp.sqrt(sqrt_pi_e2)) < mp.mpf(10) ** -27


def test_rows_carry_the_structural_constants(anchor_table):
    assert anchor_table.b(0) == 0
    assert anchor_table.A(0) == 0
    for n in range(anchor_table.n_max + 1):
        assert len(anchor_table.coeffs(n)) == n + 1


def test_table_invariants_hold(anchor_table, half_table, ctx20, ctx30):
    assert table_invariant_violations(anchor_table, ctx30) == []
    assert table_invariant_violations(half_table, ctx20) == []


def test_degree_zero_row(ctx20):
    table = build("0.5", 2, 0, ctx20)
    with mp.workprec(ctx20.bits):
        ratio = rho("2.5", 2, ctx20) / rho("1.5", 2, ctx20)
        assert abs(table.B(0) - ratio) < mp.mpf(10) ** -18
        assert abs(table.a(0) - rho("1.5", 2, ctx20) ** mp.mpf(-0.5)) < mp.mpf(10) ** -18


def test_evaluate_low_degrees(anchor_table, ctx30):
    with mp.workprec(ctx30.bits):
        assert evaluate(anchor_table, 0, "7.3") == anchor_table.a(0)
        assert abs(evaluate(anchor_table, 1, anchor_table.B(0))) < mp.mpf(10) ** -27
        with pytest.raises(IndexError):
            evaluate(anchor_table, anchor_table.n_max + 1, 1)


def test_recurrence_agrees_with_coefficients(anchor_table, ctx30):
    with mp.workprec(ctx30.bits):
        for n in range(anchor_table.n_max + 1):
            value = derivatives(anchor_table, n, "2.25", order=0)[0]
            assert abs(value - evaluate(anchor_table, n, "2.25")) < mp.mpf(10) ** -25


@pytest.mark.parametrize("n,x", [(0, "0"), (1, "0"), (3, "2.5")])
def test_determinant_oracle(anchor_table, ctx30, n, x):
    with mp.workprec(ctx30.bits):
        value, bits = determinant_eval("-0.5", 1, n, x, ctx30)
        assert bits >= ctx30.bits
        assert abs(value - evaluate(anchor_table, n, x)) < mp.mpf(10) ** -20


def test_free_term_product_matches_rows(anchor_table, ctx30):
    with mp.workprec(ctx30.bits):
        for n, value in enumerate(free_term_product(anchor_table, ctx30)):
            assert abs(value - anchor_table.free_term(n)) < mp.mpf(10) ** -20 * max(1, abs(value))


def test_christoffel_darboux(anchor_table, ctx30):
    with mp.workprec(ctx30.bits):
        lhs, rhs = christoffel_darboux(anchor_table, 2, "0.7", "3.9")
        assert abs(lhs - rhs) < mp.mpf(10) ** -20
        with pytest.raises(DomainError):
            christoffel_darboux(anchor_table, 2, 1, 1)


def test_small_t_recovers_laguerre_coefficients(ctx20):
    table = build("0.5", "1e-24", 4, ctx20)
    with mp.workprec(ctx20.bits):
        for n in range(5):
            assert abs(table.B(n) - (2 * n + mp.mpf("1.5"))) < mp.mpf(10) ** -10
            if n:
                assert abs(table.A(n) + mp.sqrt(n * (n + mp.mpf("0.5")))) < mp.mpf(10) ** -10


def test_build_rejects_bad_input(ctx20):
    with pytest.raises(DomainError):
        build("0.5", 0, 2, ctx20)
    with pytest.raises(DomainError):
        build("0.5", 1, -1, ctx20)
    with pytest.raises(DomainError):
        build("0.5", 1, settings.OPOLY_N_MAX_HARD + 1, ctx20)


def test_build_is_cached(ctx20):
    assert build("0.75", 1, 2, ctx20) is build("0.75", 1, 2, ctx20)
