import json
import math

import pytest

from wpcircle.cli import RunConfig, UsageError, check_assertion, main, run

MOB = '{"family": "mobius", "params": {"a": 0.3}, "grid": 1024}'
IDENT = '{"family": "identity", "grid": 256}'


def _json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


def test_analyze_identity(capsys):
    code, rep = _json(capsys, ["analyze", "--map", IDENT, "--no-meta"])
    assert code == 0
    res = rep["result"]
    assert res["verdicts"]["wp_class"] == "yes-trend"
    assert res["norms"]["h_half_log_derivative"]["value"] == 0.0
    assert res["norms"]["bmo_log_abs_derivative"]["value"] == 0.0
    assert rep["version"] and "meta" not in rep


def test_deterministic_without_meta(capsys):
    main(["metric", "--map", MOB, "--map2", IDENT, "--no-meta"])
    a = capsys.readouterr().out
    main(["metric", "--map", MOB, "--map2", IDENT, "--no-meta"])
    b = capsys.readouterr().out
    assert a == b
    main(["metric", "--map", MOB, "--map2", IDENT])
    assert "timestamp" in capsys.readouterr().out


def test_metric_mobius(capsys):
    _, rep = _json(capsys, ["metric", "--map", MOB, "--map2", IDENT, "--no-meta"])
    d = rep["result"]["d"]["value"]
    assert abs(d * d + 2 * math.log(0.91)) < 1e-6
    assert rep["result"]["d"]["profile"]


def test_counterexample_command(capsys):
    code, rep = _json(capsys, ["counterexample", "--alpha", "2", "--grid", "2048", "--no-meta",
                               "--assert", "g_below_bound == true",
                               "--assert", "phi_prime_profile.verdict == no-trend"])
    assert code == 0
    res = rep["result"]
    assert res["log_phi_prime_profile"]["verdict"] == "yes-trend"
    assert res["g_bound"]["value"] == pytest.approx(2 * math.pi / math.log(4))
    assert res["g_bound"]["exact"] is True


def test_assert_failure_exit_code(capsys):
    code = main(["analyze", "--map", IDENT, "--no-meta", "--assert", "verdicts.wp_class == no-trend"])
    capsys.readouterr()
    assert code == 2


def test_errors_exit_one(capsys):
    assert main(["analyze", "--map", '{"family": "bogus", "grid": 64}']) == 1
    assert main(["analyze", "--map", "{oops"]) == 1
    assert main(["operators", "--map", MOB, "--trunc", "1000"]) == 1
    assert main(["frobnicate"]) == 1
    err = capsys.readouterr().err
    assert "map-spec schema" in err


def test_degenerate_flag_only_fails_under_assert(capsys):
    flat = '{"family": "sine_flat", "grid": 256}'
    code, rep = _json(capsys, ["metric", "--map", flat, "--map2", IDENT, "--no-meta"])
    assert code == 0 and rep["flags"]
    code = main(["metric", "--map", flat, "--map2", IDENT, "--no-meta", "--assert", "d.value == null"])
    capsys.readouterr()
    assert code == 2


def test_operators_csv(capsys, tmp_path):
    out = tmp_path / "ops.csv"
    assert main(["operators", "--map", MOB, "--trunc", "4", "--csv", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "matrix,row,col,re,im"
    assert len(lines) == 1 + 2 * 256 * 4


def test_grunsky_and_welding(capsys):
    _, rep = _json(capsys, ["grunsky", "--poly", "[0, 1, 0.4]", "--trunc", "16", "--no-meta"])
    assert rep["result"]["operator_norm"]["value"] < 1
    _, rep = _json(capsys, ["welding-check", "--map", MOB, "--no-meta"])
    assert rep["result"]["welding_residual"]["value"] < 1e-12
    assert main(["welding-check", "--map", '{"family": "sine", "params": {"eps": 0.2}, "grid": 64}']) == 1


def test_flow_and_sweep(capsys):
    _, rep = _json(capsys, ["flow", "--alpha", "2", "--grid", "1024", "--no-meta"])
    assert 3.5 < rep["result"]["richardson_ratio"]["value"] < 4.5
    code = main(["sweep", "--family", "mobius", "--param", "a", "--values", "0.1,0.5", "--grid", "256",
                 "--csv", "--jobs", "2"])
    lines = capsys.readouterr().out.strip().split("\n")
    assert code == 0 and lines[0] == "value,d,d_prime,wp_class" and len(lines) == 3
    d = float(lines[2].split(",")[1])
    assert abs(d * d + 2 * math.log(0.75)) < 1e-9


def test_config_validation():
    with pytest.raises(UsageError):
        run(RunConfig("analyze", grid=256, trunc=64))
    with pytest.raises(UsageError):
        run(RunConfig("analyze", tol_cauchy=-1.0))


def test_assertion_parser():
    res = {"a": {"value": 0.5}, "b": "yes-trend", "c": [1, 2]}
    assert check_assertion(res, "a < 1")
    assert not check_assertion(res, "a >= 1")
    assert check_assertion(res, "b == yes-trend")
    assert check_assertion(res, "c.1 == 2")
    assert not check_assertion(res, "missing == 1")
    with pytest.raises(UsageError):
        check_assertion(res, "no operator here")
