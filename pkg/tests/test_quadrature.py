import pytest
from mpmath import mp

from app.core.errors import DomainError
from app.services.numerics import default_context
from app.services.quadrature import gauss_rule, gram, integrate
from app.services.recurrence import build, evaluate
from app.services.rho import rho


def test_one_point_rule(anchor_table, ctx30, sqrt_pi_e2):
    rule = gauss_rule(anchor_table, 1, ctx30)
    with mp.workprec(ctx30.bits):
        assert abs(rule.nodes[0] - mp.mpf("1.5")) < mp.mpf(10) ** -27
        assert abs(rule.weights[0] - sqrt_pi_e2) < mp.mpf(10) ** -27


def test_two_point_rule_reproduces_moments(anchor_table, ctx30):
    rule = gauss_rule(anchor_table, 2, ctx30)
    with mp.workprec(ctx30.bits):
        assert abs(integrate(rule, lambda x: 1, 0) - rho("0.5", 1, ctx30)) < mp.mpf(10) ** -27
        cubic = integrate(rule, lambda x: x ** 3, 3)
        assert abs(cubic - rho("3.5", 1, ctx30)) < mp.mpf(10) ** -25 * cubic
        p1_sq = integrate(rule, lambda x: evaluate(anchor_table, 1, x) ** 2, 2)
        assert abs(p1_sq - 1) < mp.mpf(10) ** -25


def test_gram_is_identity():
    ctx = default_context(20, 8)
    table = build("0.5", 2, 8, ctx)
    rule = gauss_rule(table, 9, ctx)
    matrix = gram(table, rule, 8)
    with mp.workprec(ctx.bits):
        worst = max(abs(matrix[i][j] - (1 if i == j else 0)) for i in range(9) for j in range(9))
        assert worst < mp.mpf(10) ** -15


def test_nodes_increase_inside_the_half_line(anchor_table, ctx30):
    rule = gauss_rule(anchor_table, 4, ctx30)
    assert rule.nodes == sorted(rule.nodes)
    assert rule.nodes[0] > 0


def test_rule_limits(anchor_table, ctx30):
    with pytest.raises(DomainError):
        gauss_rule(anchor_table, anchor_table.n_max + 2, ctx30)
    rule = gauss_rule(anchor_table, 2, ctx30)
    with pytest.raises(DomainError):
        integrate(rule, lambda x: x ** 4, 4)
    with pytest.raises(DomainError):
        integrate(rule, lambda x: x)


@pytest.mark.parametrize("nu, t", [
    pytest.param(nu, t, marks=() if (nu, t) == ("-0.5", "1") else pytest.mark.slow)
    for nu in ("-2", "-0.5", "0", "0.5", "3")
    for t in ("0.1", "1", "10")
])
def test_degree_ten_gram_on_the_grid(nu, t):
    ctx = default_context(30, 10)
    table = build(nu, t, 10, ctx)
    matrix = gram(table, gauss_rule(table, 11, ctx), 10)
    with mp.workprec(ctx.bits):
        worst = max(abs(matrix[i][j] - (1 if i == j else 0)) for i in range(11) for j in range(11))
        assert worst < mp.mpf(10) ** -15
