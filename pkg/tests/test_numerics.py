import pytest
from mpmath import mp

from app.core.errors import DomainError, PrecisionExhausted
from app.schemas.report import Method
from app.services.numerics import (
    adaptive_retry,
    central_difference,
    default_context,
    integrate_halfline,
    integrate_halfline_batch,
    integrate_interval,
    stencil,
    tolerance_for,
)


def test_default_context_reserves_guard_digits():
    ctx = default_context(30, 6)
    assert ctx.target_digits == 30
    assert ctx.bits >= 128
    assert ctx.bits * 0.30103 - 10 >= 30


def test_default_context_rejects_bad_digits():
    with pytest.raises(DomainError):
        default_context(-5)
    with pytest.raises(PrecisionExhausted):
        default_context(5000)


def test_halfline_closed_form(ctx30, sqrt_pi_e2):
    with mp.workprec(ctx30.bits):
        result = integrate_halfline(lambda x: mp.exp(-x - 1 / x) * x ** mp.mpf(-0.5), ctx30)
        assert abs(result.value - sqrt_pi_e2) < mp.mpf(10) ** -28
        assert result.evaluations > 0


def test_halfline_batch_is_linear(ctx30):
    with mp.workprec(ctx30.bits):
        def f(x):
            base = mp.exp(-x - 1 / x)
            return [base * mp.sqrt(x), base * mp.sqrt(x)]

        first, second = integrate_halfline_batch(f, ctx30)
        assert abs(first.value - second.value) < mp.mpf(10) ** -30


def test_interval_square_root_endpoint(ctx30):
    with mp.workprec(ctx30.bits):
        result = integrate_interval(lambda u: mp.sqrt(u), 0, 1, ctx30)
        assert abs(result.value - mp.mpf(2) / 3) < mp.mpf(10) ** -28


def test_interval_rejects_empty_range(ctx20):
    with pytest.raises(DomainError):
        integrate_interval(lambda u: u, 1, 1, ctx20)


def test_central_difference_polynomial(ctx30):
    with mp.workprec(ctx30.bits):
        assert abs(central_difference(lambda s: s * s, 3, 1, ctx30) - 6) < mp.mpf(10) ** -15
        assert abs(central_difference(lambda s: s ** 3, 2, 2, ctx30) - 12) < mp.mpf(10) ** -10
        assert abs(central_difference(lambda s: mp.mpf(7), 5, 1, ctx30)) < mp.mpf(10) ** -20


def test_central_difference_of_rho_half(ctx30, sqrt_pi_e2):
    # rho_{3/2}(t) = sqrt(pi) e^{-2 sqrt t} (sqrt t + 1/2), derivative -rho_{1/2}
    with mp.workprec(ctx30.bits):
        f = lambda s: mp.sqrt(mp.pi) * mp.exp(-2 * mp.sqrt(s)) * (mp.sqrt(s) + mp.mpf(1) / 2)
        assert abs(central_difference(f, 1, 1, ctx30) + sqrt_pi_e2) < mp.mpf(10) ** -15


def test_stencil_rejects_bad_orders(ctx20):
    with pytest.raises(DomainError):
        stencil(mp.mpf(1), 3, ctx20)
    with pytest.raises(DomainError):
        stencil(mp.mpf(0), 1, ctx20)


def test_adaptive_retry_accepts_stable_value(ctx20):
    value, bits = adaptive_retry(lambda c: mp.mpf(1) + 1, ctx20)
    assert value == 2
    assert bits == 2 * ctx20.bits


def test_adaptive_retry_gives_up_on_alternating_results(ctx20):
    calls = []

    def flip(c):
        calls.append(c.bits)
        return mp.mpf((-1) ** len(calls))

    with pytest.raises(PrecisionExhausted):
        adaptive_retry(flip, ctx20)


def test_tolerances_by_method(ctx30):
    with mp.workprec(ctx30.bits):
        assert abs(tolerance_for(Method.ALGEBRAIC, ctx30) - mp.mpf(10) ** -15) < mp.mpf(10) ** -40
        assert tolerance_for(Method.QUADRATURE, ctx30, 100) == 100 * tolerance_for(Method.QUADRATURE, ctx30)
        fd = tolerance_for(Method.FINITE_DIFFERENCE, ctx30)
        assert mp.mpf(10) ** -20 < fd < mp.mpf(10) ** -18
        grid = tolerance_for(Method.T_GRID_INTEGRAL, ctx30, gap="1e-12", tail="1e-13")
        assert grid > mp.mpf(10) ** -11
