import pytest
from mpmath import mp
from pydantic import ValidationError

from app.schemas.report import Method, ResidualEntry, ResidualReport
from app.services.residuals import failed_entry, normalized, report, residual_entry, worst


def test_entry_passes_when_terms_cancel(ctx20):
    entry = residual_entry("3.1", 0, "0.5", 1, [mp.mpf(3), mp.mpf(-3)], Method.ALGEBRAIC, ctx20)
    assert entry.passed
    assert entry.model_dump(by_alias=True)["pass"] is True


def test_entry_fails_when_terms_disagree(ctx20):
    entry = residual_entry("3.1", 0, "0.5", 1, [mp.mpf(3), mp.mpf(-2)], Method.ALGEBRAIC, ctx20)
    assert not entry.passed


def test_failed_entry_has_infinite_residual(ctx20):
    entry = failed_entry("2.16", 0, "0.5", 1, Method.T_GRID_INTEGRAL, ctx20)
    assert mp.isinf(entry.residual)
    assert not entry.passed


def test_pass_flag_must_match_the_numbers():
    with pytest.raises(ValidationError):
        ResidualEntry(identity_id="3.1", n=0, nu=0, t=1, residual=1, tolerance=2, method=Method.ALGEBRAIC, passed=False)


def test_report_keeps_the_worst_row_per_degree(ctx20):
    good = residual_entry("3.1", 1, "0.5", 1, [mp.one, -mp.one], Method.ALGEBRAIC, ctx20)
    bad = residual_entry("3.1", 1, "0.5", 1, [mp.one, mp.mpf("-0.5")], Method.ALGEBRAIC, ctx20)
    result = report([good, bad])
    assert len(result.entries) == 1
    assert not result.all_passed
    merged = ResidualReport.combine([result, ResidualReport(errors=["grid: failed"])])
    assert merged.errors == ["grid: failed"]
    assert merged.only(["2.27"]).entries == []


def test_normalization_helpers():
    assert normalized([0, 0]) == [0, 0]
    assert normalized([2, -4]) == [mp.mpf("0.5"), -1]
    assert worst([[1, -1], [1, 1]]) == [1, 1]


def test_floor_keeps_rounding_noise_small():
    noise = [mp.mpf("1e-40"), mp.mpf("-3e-40")]
    assert normalized(noise) == [mp.mpf("1e-40") / mp.mpf("3e-40"), -1]
    floored = normalized(noise, mp.mpf("1e-20"))
    assert abs(mp.fsum(floored)) < mp.mpf(10) ** -19
    # a floor below the largest term changes nothing
    assert normalized([2, -4], 1) == [mp.mpf("0.5"), -1]


def test_worst_pairs_floors_with_term_sets():
    noise = [mp.mpf("1e-40"), mp.mpf("1e-40")]
    chosen = worst([noise, [1, mp.mpf("-0.999")]], [mp.one, 0])
    assert chosen == [1, mp.mpf("-0.999")]
