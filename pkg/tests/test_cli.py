import json

from app.cli import main
from app.core.errors import EXIT_OK, EXIT_USAGE

COEFFS_ARGS = ["coeffs", "--nu", "-0.5", "--t", "1", "--n-max", "1", "--digits", "30", "--format", "json"]


def test_coeffs_json_anchor(capsys):
    assert main(COEFFS_ARGS) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert set(document) == {"nu", "t", "n_max", "precision_bits", "rows"}
    assert document["rows"][0]["B_n"] == "1.5"
    assert document["rows"][1]["A_n"] == "-1"
    assert set(document["rows"][1]) == {"n", "a_n", "b_n", "A_n", "B_n", "coeffs"}


def test_output_is_deterministic(capsys):
    main(COEFFS_ARGS)
    first = capsys.readouterr().out
    main(COEFFS_ARGS)
    assert capsys.readouterr().out == first


def test_rho_prints_the_value(capsys):
    assert main(["rho", "--nu", "0.5", "--t", "1", "--digits", "20"]) == EXIT_OK
    value = capsys.readouterr().out.strip()
    assert value.startswith("0.2398755439")


def test_verify_csv(capsys):
    code = main(["verify", "--nu", "0.5", "--t", "1", "--n-max", "1", "--suite", "3.1,3.6", "--digits", "20"])
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "identity_id,n,nu,t,residual,tolerance,method,pass"
    assert all(line.endswith(",true") for line in lines[1:])
    assert {line.split(",")[0] for line in lines[1:]} == {"3.1", "3.6"}


def test_quad_writes_to_file(tmp_path, capsys):
    target = tmp_path / "rule.json"
    code = main(["quad", "--nu", "-0.5", "--t", "1", "--m", "1", "--digits", "20", "--format", "json", "--out", str(target)])
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""
    document = json.loads(target.read_text())
    assert document["nodes"] == ["1.5"]


def test_eval_with_oracle(capsys):
    assert main(["eval", "--nu", "-0.5", "--t", "1", "--n", "1", "--x", "0", "--digits", "20", "--oracle"]) == EXIT_OK
    value, oracle, difference = capsys.readouterr().out.split()
    assert value[:15] == oracle[:15]
    assert float(difference) < 1e-15


def test_usage_errors():
    assert main(["coeffs", "--t", "1"]) == EXIT_USAGE
    assert main(["coeffs", "--nu", "0.5", "--t", "1", "--digits", "5"]) == EXIT_USAGE
    assert main(["coeffs", "--nu", "0.5", "--t", "-1"]) == EXIT_USAGE
    assert main(["verify", "--nu", "0.5", "--t", "1", "--suite", "9.99", "--digits", "20"]) == EXIT_USAGE
    assert main(["limit", "--nu", "-1.5", "--n-max", "2", "--digits", "20"]) == EXIT_USAGE
    assert main(["expand", "--nu", "-1.5", "--t", "1", "--n", "0", "--digits", "20"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
