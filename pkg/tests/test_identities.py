import pytest
from mpmath import mp

from app.core.config import settings
from app.core.errors import DomainError
from app.schemas.precision import PrecisionContext
from app.schemas.report import Method
from app.services.identities import (
    FD_T_IDS,
    GRID_T_IDS,
    KNOWN_IDS,
    REQUIRED_IDS,
    check_coefficient_relations,
    check_integral_difference,
    check_inverse_moments,
    check_mixed_pde,
    check_recurrence_identities,
    check_second_order_ode,
    check_t_relations,
    check_x_derivative,
    locked_ids,
    requested_ids,
    run_suite,
)
from app.services.numerics import default_context
from app.services.sampling import XorShift64, x_samples
from app.services.tgrid import GridLadder


def _failing(result):
    return [(e.identity_id, e.n) for e in result.failures()]


@pytest.fixture(scope="module")
def samples(ctx30):
    with mp.workprec(ctx30.bits):
        return [mp.mpf("0.5"), mp.mpf("1.5"), mp.mpf(4)]


def test_sampler_is_reproducible():
    first = [XorShift64(42).next_u64() for _ in range(3)]
    assert first == [XorShift64(42).next_u64() for _ in range(3)]
    assert XorShift64(0).state != 0
    values = x_samples(42, 5)
    assert values == x_samples(42, 5)
    assert all(mp.mpf("0.1") < v < 10 for v in values)


def test_recurrence_level_rows(anchor_table, samples, ctx30):
    result = check_recurrence_identities(anchor_table, samples, ctx30)
    assert {"1.5", "1.6", "1.16", "1.19", "1.20", "1.21", "1.22"} <= set(result.ids())
    assert result.all_passed, _failing(result)


def test_inverse_moment_rows(anchor_table, ctx30):
    result = check_inverse_moments(anchor_table, ctx30)
    assert set(result.ids()) == {"2.1", "2.2", "2.3", "2.4"}
    assert result.all_passed, _failing(result)


def test_x_derivative_rows(anchor_table, samples, ctx30):
    result = check_x_derivative(anchor_table, samples, ctx30)
    assert {"2.5", "2.10", "2.11"} <= set(result.ids())
    assert result.all_passed, _failing(result)


def test_second_order_rows(anchor_table, samples, ctx30):
    result = check_second_order_ode(anchor_table, samples, ctx30)
    assert 0 in [e.n for e in result.for_id("3.1")]
    assert result.all_passed, _failing(result)


def test_second_order_rows_at_a_zero_of_p1(anchor_table, ctx30):
    # B_0 = 3/2 at nu = -1/2, t = 1, so P_1 and P_1'' both vanish there
    with mp.workprec(ctx30.bits):
        result = check_second_order_ode(anchor_table, [mp.mpf("1.5")], ctx30)
        rows = [e for e in result.entries if e.identity_id in ("2.38", "3.6") and e.n == 1]
        assert len(rows) == 2
        assert all(e.residual < mp.mpf(10) ** -15 for e in rows)
    assert result.all_passed, _failing(result)


def test_t_differences(ctx20):
    result = check_t_relations("0.5", 1, 3, ctx20, ids=FD_T_IDS)
    assert set(result.ids()) == FD_T_IDS
    assert result.all_passed, _failing(result)


def test_t_integrals(ctx20):
    result = check_t_relations("0.5", "0.5", 2, ctx20, ids=GRID_T_IDS)
    assert result.errors == []
    assert set(result.ids()) == GRID_T_IDS
    assert result.all_passed, _failing(result)


def test_integral_difference(ctx20):
    with mp.workprec(ctx20.bits):
        result = check_integral_difference("0.5", "0.5", 1, [mp.mpf(2)], ctx20)
    assert result.ids() == ["3.11"]
    assert result.all_passed, _failing(result)


def test_diagonal_slope_with_mixed_small_t_powers(ctx30):
    # below the grid the integrand runs through y^(1/2), y and y^(3/2) at nu = 1/2
    result = check_t_relations("0.5", "0.5", 2, ctx30, ids={"2.34"})
    assert [e.n for e in result.entries] == [0, 1, 2]
    assert result.all_passed, _failing(result)


def test_anchored_grid_forms(ctx20):
    ids = GRID_T_IDS | {"3.11"}
    result = run_suite("-0.5", "0.5", 2, sorted(ids), ctx20)
    assert result.errors == []
    assert set(result.ids()) == ids
    assert result.all_passed, _failing(result)


@pytest.mark.slow
@pytest.mark.parametrize("nu", ["-0.5", "0.5"])
def test_doubling_the_grid_reduces_residuals(monkeypatch, ctx30, nu):
    monkeypatch.setattr(settings, "OPOLY_TGRID_ORDER", 8)
    floor = mp.mpf(10) ** -18
    residuals = []
    for panels in (4, 8):
        with mp.workprec(ctx30.bits):
            ladder = GridLadder(mp.mpf(nu), mp.mpf("0.5"), 3, ctx30, panels=panels, max_panels=2 * panels)
        result = check_t_relations(nu, "0.5", 2, ctx30, ids=GRID_T_IDS, grids=ladder)
        residuals.append({(e.identity_id, e.n): e.residual for e in result.entries})
    coarse, fine = residuals
    assert coarse.keys() == fine.keys()
    for key, value in fine.items():
        assert value <= coarse[key] or value < floor, key


def test_halving_the_difference_step_reduces_residuals(ctx20):
    ids = {"2.15", "2.27", "2.36", "3.16"}
    residuals = []
    for step in ("1e-3", "5e-4"):
        with mp.workprec(ctx20.bits):
            ctx = PrecisionContext(**{**ctx20.model_dump(), "fd_step_scale": mp.mpf(step)})
        result = check_t_relations("0.5", 1, 2, ctx, ids=ids)
        assert all(e.method is Method.FINITE_DIFFERENCE for e in result.entries)
        residuals.append({(e.identity_id, e.n): e.residual for e in result.entries})
    coarse, fine = residuals
    assert coarse.keys() == fine.keys()
    for key, value in fine.items():
        assert value < coarse[key], key


def test_mixed_partial_and_coefficients(ctx20):
    with mp.workprec(ctx20.bits):
        points = [mp.mpf(1), mp.mpf("2.5")]
    assert check_mixed_pde("-0.5", 1, 2, points, ctx20).all_passed
    result = check_coefficient_relations("-0.5", 1, 2, points, ctx20)
    assert {"3.12", "3.13", "3.14"} <= set(result.ids())
    assert result.all_passed, _failing(result)


def test_requested_ids():
    assert requested_ids(["all"]) == list(KNOWN_IDS)
    assert requested_ids([]) == list(KNOWN_IDS)
    assert requested_ids(["3.1", "2.27"]) == [i for i in KNOWN_IDS if i in ("3.1", "2.27")]
    with pytest.raises(DomainError):
        requested_ids(["9.99"])


def test_coverage_lock_drops_expansion_rows_below_minus_one():
    locked = locked_ids(mp.mpf("-1.5"), 6, REQUIRED_IDS)
    assert not any(i.startswith("4.") for i in locked)
    assert "3.1" in locked


def test_selected_suite(ctx20):
    result = run_suite("0.5", 1, 2, ["3.1", "2.27"], ctx20, seed=7)
    assert result.ids() == ["2.27", "3.1"]
    assert result.errors == []
    assert result.all_passed, _failing(result)


def test_full_suite_covers_every_locked_id():
    ctx = default_context(20, 4)
    result = run_suite("0.5", 1, 2, ["all"], ctx)
    assert result.errors == []
    assert set(locked_ids(mp.mpf("0.5"), 2, REQUIRED_IDS)) <= set(result.ids())
    assert result.all_passed, _failing(result)


@pytest.mark.slow
@pytest.mark.parametrize("nu", ["-0.5", "0.5", "2"])
@pytest.mark.parametrize("t", ["0.5", "2"])
def test_suite_passes_on_the_acceptance_grid(nu, t):
    ctx = default_context(30, 6)
    result = run_suite(nu, t, 6, ["all"], ctx)
    assert result.errors == []
    assert set(locked_ids(mp.mpf(nu), 6, REQUIRED_IDS)) <= set(result.ids())
    assert result.all_passed, _failing(result)
