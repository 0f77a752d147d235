import csv
import io
import json
import math
import subprocess
import sys

import pytest

from hvspin.cli import COLUMNS, main, parse_grid


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), stdout=buf)
    return code, buf.getvalue()


def run_json(*argv):
    code, out = run(*argv, "--format", "json")
    return code, (json.loads(out) if out else None)


def parse_csv(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    return rows


def test_correlate_complete_60():
    code, recs = run_json("correlate", "--model", "complete", "--theta", "60", "--trials", "1000000", "--seed", "42")
    assert code == 0 and len(recs) == 1
    r = recs[0]
    assert list(r) == list(COLUMNS)
    assert r["value"] == pytest.approx(-0.5, abs=0.005)
    assert r["z_score"] < 4
    assert (r["n"], r["seed"], r["shards"]) == (1_000_000, 42, 1)


def test_correlate_theta_zero_exact():
    code, recs = run_json("correlate", "--model", "complete", "--theta", "0", "--trials", "1000")
    assert recs[0]["value"] == -1.0


def test_correlate_baseline_90():
    code, recs = run_json("correlate", "--model", "local_baseline", "--theta", "90", "--trials", "1000000")
    assert recs[0]["analytic"] == 0.0
    assert recs[0]["z_score"] < 4


def test_defaults_are_recorded():
    code, recs = run_json("correlate", "--theta", "45", "--trials", "1000")
    assert recs[0]["seed"] == 0 and recs[0]["model"] == "complete"


def test_sweep_complete():
    code, recs = run_json("sweep", "--model", "complete", "--theta-grid", "0:180:15", "--trials", "100000")
    corr = [r for r in recs if r["quantity"] == "correlation"]
    assert len(corr) == 13
    for r in corr:
        assert r["analytic"] == pytest.approx(-math.cos(math.radians(r["theta_deg"])), abs=1e-12)
        assert r["z_score"] < 4
    at90 = [r for r in recs if r["theta_deg"] == 90.0 and r["quantity"].startswith("p_")]
    assert len(at90) == 4
    for r in at90:
        assert r["value"] == pytest.approx(0.25, abs=0.01)


def test_sweep_product_only_has_no_joint_records():
    code, recs = run_json("sweep", "--model", "sufficient_condition", "--theta-grid", "0,90", "--trials", "1000")
    assert code == 0
    assert {r["quantity"] for r in recs} == {"correlation"}


def test_joint_probs():
    code, recs = run_json("joint-probs", "--theta-grid", "60", "--trials", "100000")
    assert [r["quantity"] for r in recs] == ["p_pp", "p_pm", "p_mp", "p_mm"]
    assert recs[0]["analytic"] == pytest.approx(0.125)
    code, out = run("joint-probs", "--model", "sufficient_condition", "--trials", "10")
    assert code == 2 and out == ""


@pytest.mark.parametrize("model, mag", [("complete", 2 * math.sqrt(2)), ("local_baseline", 2.0)])
def test_chsh_defaults(model, mag):
    code, recs = run_json("chsh", "--model", model, "--trials", "1000000")
    r = recs[0]
    assert abs(r["analytic"]) == pytest.approx(mag, abs=1e-12)
    assert abs(abs(r["value"]) - mag) < 4 * r["std_error"]


@pytest.mark.parametrize("model", ["complete", "local_baseline"])
def test_chsh_degenerate(model):
    code, recs = run_json("chsh", "--model", model, "--angles", "20", "20", "20", "20", "--trials", "1000")
    assert abs(recs[0]["value"]) == 2.0


def test_audit_signaling_passes():
    code, recs = run_json("audit", "signaling", "--model", "complete", "--trials", "100000")
    assert code == 0
    q = {r["quantity"]: r for r in recs}
    assert q["audit_passed"]["value"] == 1.0
    assert q["z_threshold"]["value"] == 5.0
    assert sum(k.startswith("mean_x") for k in q) == 16


def test_audit_asymmetry():
    code, recs = run_json("audit", "asymmetry", "--trials", "200000")
    q = {r["quantity"]: r for r in recs}
    assert code == 0
    assert q["x_flip_rate"]["value"] == 0.0
    assert q["y_flip_rate"]["value"] > 0.2


def test_audit_outcome_dependence():
    code, recs = run_json("audit", "outcome-dependence", "--theta", "60", "--trials", "1000000")
    q = {r["quantity"]: r for r in recs}
    assert code == 0
    assert q["gap"]["analytic"] == pytest.approx(0.5)


def test_audit_failure_sets_exit_code():
    # a zero threshold cannot be met by a noisy gap estimate
    code, recs = run_json("audit", "outcome-dependence", "--theta", "60", "--trials", "1000", "--z-threshold", "0")
    assert code == 1
    assert {r["quantity"]: r["value"] for r in recs}["audit_passed"] == 0.0


def test_audit_product_only_errors(capsys):
    code, out = run("audit", "signaling", "--model", "sufficient_condition", "--trials", "10")
    assert code == 2 and out == ""
    assert "defines no marginals" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["correlate"], ["correlate", "--theta", "10", "--model", "nope"], ["frobnicate"]])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv, stdout=io.StringIO())
    assert exc.value.code != 0


def test_invalid_values_exit_nonzero():
    assert run("correlate", "--theta", "200", "--trials", "10")[0] == 2
    with pytest.raises(SystemExit):
        main(["correlate", "--theta", "10", "--trials", "0"], stdout=io.StringIO())
    with pytest.raises(SystemExit):
        main(["correlate", "--theta", "10", "--trials", "3", "--shards", "4"], stdout=io.StringIO())


def test_csv_and_json_agree():
    argv = ["sweep", "--theta-grid", "0:90:45", "--trials", "20000", "--seed", "5", "--shards", "3"]
    _, text = run(*argv, "--format", "csv")
    _, recs = run_json(*argv)
    rows = parse_csv(text)
    assert len(rows) == len(recs)
    for row, rec in zip(rows, recs):
        assert list(row) == list(COLUMNS)
        for k in COLUMNS:
            v = rec[k]
            if v is None:
                assert row[k] == ""
            elif isinstance(v, str):
                assert row[k] == v
            else:
                assert float(row[k]) == v


@pytest.mark.parametrize("shards", [1, 4, 16])
def test_record_rerun_reproduces(shards):
    _, first = run_json("correlate", "--theta", "37", "--trials", "50000", "--seed", "123", "--shards", str(shards))
    r = first[0]
    _, again = run_json(
        "correlate", "--theta", str(r["theta_deg"]), "--trials", str(r["n"]), "--seed", str(r["seed"]),
        "--shards", str(r["shards"]), "--workers", "4",
    )
    assert again == first


def test_parse_grid():
    assert parse_grid("0:180:15") == [15.0 * i for i in range(13)]
    assert parse_grid("0,30,60") == [0.0, 30.0, 60.0]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hvspin", "correlate", "--theta", "90", "--trials", "1000", "--format", "json"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)[0]["quantity"] == "correlation"
