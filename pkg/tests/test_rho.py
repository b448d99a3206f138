import pytest
from mpmath import mp

from app.core.errors import DomainError
from app.services.numerics import default_context
from app.services.rho import (
    check_fractional_identity,
    clear_cache,
    check_rho_derivative,
    moment_table,
    rho,
    rho_derivative,
)


def test_half_integer_closed_forms(ctx30, sqrt_pi_e2):
    with mp.workprec(ctx30.bits):
        assert abs(rho("0.5", 1, ctx30) - sqrt_pi_e2) < mp.mpf(10) ** -28
        assert abs(rho("1.5", 1, ctx30) - mp.mpf("1.5") * sqrt_pi_e2) < mp.mpf(10) ** -28
        assert mp.nstr(rho("0.5", 1, ctx30), 7) == "0.2398755"


def test_small_t_approaches_gamma(ctx20):
    with mp.workprec(ctx20.bits):
        assert abs(rho("1.5", "1e-24", ctx20) - mp.gamma(mp.mpf("1.5"))) < mp.mpf(10) ** -10


def test_moment_table_anchor(ctx30, sqrt_pi_e2):
    with mp.workprec(ctx30.bits):
        table = moment_table("-0.5", 1, 1, 3, ctx30)
        ratios = [table.rho(k) / sqrt_pi_e2 for k in (1, 2, 3)]
        for got, want in zip(ratios, ["1", "1.5", "3.25"]):
            assert abs(got - mp.mpf(want)) < mp.mpf(10) ** -27
        with pytest.raises(IndexError):
            table.rho(4)


def test_seeded_table_matches_direct(ctx20):
    with mp.workprec(ctx20.bits):
        direct = moment_table("0.25", 2, 0, 8, ctx20)
        seeded = moment_table("0.25", 2, 0, 8, ctx20, seeded=True)
        for a, b in zip(direct.values, seeded.values):
            assert abs(a - b) < mp.mpf(10) ** -17 * a


def test_negative_order_derivative(ctx30, sqrt_pi_e2):
    with mp.workprec(ctx30.bits):
        assert abs(rho_derivative("1.5", 1, 1, ctx30) + sqrt_pi_e2) < mp.mpf(10) ** -28
        assert rho_derivative("1.5", 1, 0, ctx30) == rho("1.5", 1, ctx30)


@pytest.mark.parametrize("order", [1, 2])
def test_derivative_check_passes(ctx20, order):
    assert check_rho_derivative("0.5", 1, order, ctx20).passed


def test_fractional_identity(ctx30):
    with mp.workprec(ctx30.bits):
        assert check_fractional_identity("0.5", 1, ctx30) < mp.mpf(10) ** -25


def test_nonpositive_t_is_rejected(ctx20):
    with pytest.raises(DomainError):
        rho("0.5", 0, ctx20)
    with pytest.raises(DomainError):
        moment_table("0.5", 1, 3, 1, ctx20)


def test_cache_can_be_cleared(ctx20):
    first = rho("0.5", 3, ctx20)
    clear_cache()
    assert rho("0.5", 3, ctx20) == first


ACCEPTANCE_GRID = [
    pytest.param(nu, t, marks=() if (nu, t) == ("0.5", "1") else pytest.mark.slow)
    for nu in ("-2", "-0.5", "0", "0.5", "3")
    for t in ("0.1", "1", "10")
]


@pytest.mark.parametrize("nu, t", ACCEPTANCE_GRID)
def test_moment_recurrence_on_the_grid(nu, t):
    ctx = default_context(30)
    table = moment_table(nu, t, -3, 26, ctx)
    with mp.workprec(ctx.bits):
        nu, t = mp.mpf(nu), mp.mpf(t)
        for k in range(-2, 26):
            terms = [table.rho(k + 1), -(nu + k) * table.rho(k), -t * table.rho(k - 1)]
            assert abs(mp.fsum(terms)) < mp.mpf(10) ** -25 * max(abs(v) for v in terms), k
