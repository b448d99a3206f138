import pytest
from mpmath import mp

from app.core.errors import DomainError
from app.services import tgrid
from app.services.tgrid import GridLadder, LogGrid, tail_exponents


def _grid(ctx, t="0.5", panels=4):
    with mp.workprec(ctx.bits):
        return LogGrid(mp.mpf(t), panels, 16, ctx)


def test_exponents_of_half_integer_order():
    with mp.workprec(128):
        terms = tail_exponents("0.5", 8)
        assert [m for _, m in terms] == [0] * 8
        assert [e for e, _ in terms] == [mp.mpf(k) / 2 for k in range(1, 9)]


def test_integer_order_adds_log_powers():
    with mp.workprec(128):
        terms = [(int(e), m) for e, m in tail_exponents(2, 8)]
    assert terms == [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (4, 0), (4, 1), (5, 0)]


def test_panels_are_graded_toward_t(ctx30):
    grid = _grid(ctx30)
    with mp.workprec(ctx30.bits):
        assert grid.widths == sorted(grid.widths, reverse=True)
        assert abs(mp.fsum(grid.widths) - (grid.s_max - grid.s_min)) < mp.mpf(10) ** -30
        assert grid.y == sorted(grid.y)
        assert grid.y_min < grid.y[0] and grid.y[-1] < grid.t


def test_integral_and_cumulative_of_y(ctx30):
    grid = _grid(ctx30, panels=16)
    with mp.workprec(ctx30.bits):
        # int y ds = y - y_min
        assert abs(grid.integral(grid.y) - (grid.t - grid.y_min)) < mp.mpf(10) ** -28
        running = grid.cumulative(grid.y)
        assert max(abs(c - (y - grid.y_min)) for c, y in zip(running, grid.y)) < mp.mpf(10) ** -17


def test_tail_of_a_mixed_power_series(ctx30):
    grid = _grid(ctx30)
    with mp.workprec(ctx30.bits):
        values = [mp.sqrt(y) + 3 * y - 2 * y ** mp.mpf("1.5") for y in grid.y]
        y0 = grid.y_min
        want = 2 * mp.sqrt(y0) + 3 * y0 - mp.mpf(4) / 3 * y0 ** mp.mpf("1.5")
        tail, bound = grid.tail(values, "0.5")
        assert abs(tail - want) < mp.mpf(10) ** -25
        assert bound < mp.mpf(10) ** -20


def test_tail_with_a_log_term(ctx30):
    grid = _grid(ctx30, t=2)
    with mp.workprec(ctx30.bits):
        values = [y ** 2 * mp.log(y) + y for y in grid.y]
        y0 = grid.y_min
        want = y0 ** 2 * (mp.log(y0) / 2 - mp.mpf(1) / 4) + y0
        tail, _ = grid.tail(values, 2)
        assert abs(tail - want) < mp.mpf(10) ** -25


def test_tail_bound_covers_a_truncated_series(ctx30):
    grid = _grid(ctx30)
    with mp.workprec(ctx30.bits):
        values = [mp.sqrt(y) * mp.exp(-y) for y in grid.y]
        want = mp.quad(lambda y: mp.exp(-y) / mp.sqrt(y), [0, grid.y_min])
        tail, bound = grid.tail(values, "0.5")
        assert abs(tail - want) <= bound + mp.mpf(10) ** -28


def test_zero_integrand_has_no_tail(ctx30):
    grid = _grid(ctx30)
    with mp.workprec(ctx30.bits):
        assert grid.tail([mp.zero] * len(grid.y), "0.5") == (0, 0)


def test_grid_needs_a_panel(ctx30):
    with pytest.raises(DomainError):
        LogGrid(1, 0, 16, ctx30)


def test_ladder_doubles_up_to_the_cap(monkeypatch, ctx20):
    built = []

    def fake_tables(nu, t, n_max, ctx, panels):
        built.append(panels)
        return panels

    monkeypatch.setattr(tgrid, "GridTables", fake_tables)
    ladder = GridLadder(mp.mpf("0.5"), mp.mpf(1), 2, ctx20, panels=4, max_panels=16)
    assert list(ladder.pairs()) == [(4, 8), (8, 16)]
    assert ladder.grid(8) == 8
    assert built == [4, 8, 16]


def test_ladder_always_offers_one_pair(monkeypatch, ctx20):
    monkeypatch.setattr(tgrid, "GridTables", lambda nu, t, n_max, ctx, panels: panels)
    ladder = GridLadder(mp.mpf("0.5"), mp.mpf(1), 2, ctx20, panels=8, max_panels=4)
    assert list(ladder.pairs()) == [(8, 16)]
