import pytest
from mpmath import mp

from app.core.errors import DomainError
from app.services import hankel
from app.services.hankel import (
    MomentWindow,
    check_det_formulas,
    d_determinant,
    g_determinant,
    g_minor,
    h_determinant,
)
from app.services.numerics import adaptive_retry
from app.services.recurrence import build
from app.services.rho import rho


def test_low_order_determinants(ctx30, sqrt_pi_e2):
    with mp.workprec(ctx30.bits):
        assert g_determinant("-0.5", 1, -1, ctx30).value == 1
        assert abs(g_determinant("-0.5", 1, 0, ctx30).value - sqrt_pi_e2) < mp.mpf(10) ** -27
        g1 = g_determinant("-0.5", 1, 1, ctx30).value
        assert abs(g1 - mp.pi * mp.exp(-4)) < mp.mpf(10) ** -27
        assert mp.nstr(g1, 6) == "0.0575403"


def test_determinants_from_table_agree(ctx20):
    table = build("0.5", 2, 3, ctx20)
    with mp.workprec(ctx20.bits):
        product = mp.one
        for k in range(4):
            product /= table.a(k) ** 2
        assert abs(g_determinant("0.5", 2, 3, ctx20).value - product) < mp.mpf(10) ** -14 * product


def test_single_minor(ctx20):
    with mp.workprec(ctx20.bits):
        assert abs(g_minor("0.3", 1, 1, 1, ctx20) - rho("2.3", 1, ctx20)) < mp.mpf(10) ** -18
        assert g_minor("0.3", 1, 0, 1, ctx20) == 1
        with pytest.raises(DomainError):
            g_minor("0.3", 1, 2, 4, ctx20)


def test_h_family_shape(ctx20):
    with mp.workprec(ctx20.bits):
        assert h_determinant(2, 2, "-0.5", 1, 2, ctx20).value == 0
        h12 = h_determinant(1, 2, "-0.5", 1, 1, ctx20).value
        assert abs(h12 - g_determinant("-0.5", 1, 1, ctx20).value) < mp.mpf(10) ** -18
        assert h_determinant(2, 1, "-0.5", 1, 2, ctx20).value == -h_determinant(1, 2, "-0.5", 1, 2, ctx20).value


def test_h_and_d_reject_degree_zero(ctx20):
    with pytest.raises(DomainError):
        h_determinant(1, 2, "0.5", 1, 0, ctx20)
    with pytest.raises(DomainError):
        d_determinant(1, "0.5", 1, 0, ctx20)


def test_determinant_identities_pass(anchor_table, ctx30):
    result = check_det_formulas(anchor_table, ctx30)
    assert result.errors == []
    assert result.entries
    assert result.all_passed, [e.identity_id for e in result.failures()]
    assert {"3.22", "3.23", "3.36", "3.40"} <= set(result.ids())


def test_identity_determinants_run_under_precision_doubling(ctx20, monkeypatch):
    levels = []

    def counting(computation, ctx):
        def tracked(c):
            levels.append(c.bits)
            return computation(c)

        return adaptive_retry(tracked, ctx)

    monkeypatch.setattr(hankel, "adaptive_retry", counting)
    table = build("0.5", 1, 2, ctx20)
    result = check_det_formulas(table, ctx20)
    assert result.all_passed, [e.identity_id for e in result.failures()]
    assert ctx20.bits in levels
    assert 2 * ctx20.bits in levels


def test_window_determinants_are_memoized(ctx20, monkeypatch):
    want = g_determinant("0.5", 1, 2, ctx20).value
    window = MomentWindow(mp.mpf("0.5"), mp.mpf(1), 1, 7, ctx20)
    first = window.g(2)
    with mp.workprec(ctx20.bits):
        assert abs(first - want) < mp.mpf(10) ** -18 * want
    monkeypatch.setattr(hankel, "adaptive_retry", lambda *args: pytest.fail("recomputed"))
    assert window.g(2) == first
