"""CLI plumbing: subcommands, emit formats, exit codes."""

import csv
import io
import json

import pytest

from heights.cli import main
from heights.families import build_p1_fs


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compute_hk_table(capsys):
    code, out, _ = run(["compute", "--family", "p1-fs",
                        "--functional", "hk"], capsys)
    assert code == 0
    assert "hk" in out and "0.8378770664" in out


def test_compute_relative_json(capsys):
    code, out, _ = run(["compute", "--family", "p2-blowup",
                        "--primes", "2,3", "--functional", "hk",
                        "--relative-to", "base", "--emit", "json"], capsys)
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["symbolic"] == "-32*log 2 + -32*log 3"
    assert rows[0]["value"] == pytest.approx(-32 * (0.6931471805599453
                                                    + 1.0986122886681098))


def test_compute_unknown_family_exits_2(capsys):
    code, _, err = run(["compute", "--family", "nope"], capsys)
    assert code == 2 and "validation error" in err


def test_compute_bad_model_composite_prime(tmp_path, capsys):
    m = build_p1_fs()
    obj = m.to_json()
    obj["form"]["K,L"] = {"const": "0", "logs": {"6": "1"},
                          "real": 0.0, "real_exact": True}
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    code, _, err = run(["compute", "--model", str(bad)], capsys)
    assert code == 2 and "NonPrimeLabel" in err


def test_compute_pair_functionals(capsys):
    code, out, _ = run(["compute", "--family", "p2-blowup",
                        "--functional", "I,J", "--emit", "json"], capsys)
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["functional"] == "I" and "16*log" in rows[0]["symbolic"]


def test_compute_pair_functional_needs_pair(capsys):
    code, _, err = run(["compute", "--family", "p1-fs",
                        "--functional", "I"], capsys)
    assert code == 2


def test_compute_snA(capsys):
    code, out, _ = run(["compute", "--family", "p2-blowup",
                        "--functional", "snA", "--prime", "3",
                        "--emit", "json"], capsys)
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["symbolic"] == "5/4"


def test_scan_writes_rfc4180_csv(tmp_path, capsys):
    out_path = tmp_path / "scan.csv"
    code, out, _ = run(["scan", "--family", "p1-fs", "--m-max", "12",
                        "--out", str(out_path), "--emit", "json"], capsys)
    assert code == 0
    raw = out_path.read_bytes().decode()
    assert "\r\n" in raw
    rows = list(csv.DictReader(io.StringIO(raw)))
    assert len(rows) == 12 and rows[0]["m"] == "1"
    fit = json.loads((tmp_path / "scan.csv.fit.json").read_text())
    assert "fitted_log_slope" in fit


def test_scan_mmax_zero_exits_2(capsys):
    code, _, err = run(["scan", "--family", "p1-fs", "--m-max", "0"], capsys)
    assert code == 2


def test_scan_hilbert_samuel(tmp_path, capsys):
    out_path = tmp_path / "hs.csv"
    code, out, _ = run(["scan", "--family", "p1-fs", "--m-max", "60",
                        "--kind", "hilbert-samuel", "--out", str(out_path),
                        "--emit", "json"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out_path.read_text())))
    assert len(rows) == 60
    # residual/m shrinks on the tail (the crossover region at tiny m
    # is not monotone)
    assert abs(float(rows[-1]["residual_over_m"])) < \
        abs(float(rows[29]["residual_over_m"]))


def test_balanced_trace(tmp_path, capsys):
    out_path = tmp_path / "bal.csv"
    code, _, _ = run(["balanced", "--family", "p1-fs", "--m", "4",
                      "--perturb", "0.05", "--tol", "1e-8",
                      "--grid", "64", "--out", str(out_path)], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out_path.read_text())))
    assert rows[-1]["iteration"] == "converged"
    assert rows[-1]["distance"] == "True"
    hs = [float(r["htilde_C"]) for r in rows[:-1]]
    assert all(b <= a + 1e-10 for a, b in zip(hs, hs[1:]))


def test_balanced_zero_perturb_fast(capsys):
    code, out, _ = run(["balanced", "--family", "p1-fs", "--m", "4",
                        "--perturb", "0", "--tol", "1e-8", "--grid", "64",
                        "--emit", "json"], capsys)
    assert code == 0
    rows = json.loads(out)
    assert rows[-1]["htilde_C"] <= 1    # converged within one iteration


def test_balanced_bad_tol_exits_2(capsys):
    code, _, _ = run(["balanced", "--family", "p1-fs", "--tol", "-1"],
                     capsys)
    assert code == 2


def test_bp_report(capsys):
    code, out, _ = run(["bp", "--weights", "8,15,7", "--prime", "11"],
                       capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["chart"] == "1/7(1,1)"
    assert rep["destabilizing"] is True


def test_bp_bad_weights_exits_2(capsys):
    code, _, err = run(["bp", "--weights", "4,6,7", "--prime", "5"], capsys)
    assert code == 2 and "CoprimalityViolated" in err


def test_faltings_both_methods(capsys):
    code, out, _ = run(["faltings", "--curve", "37a1", "--emit", "json",
                        "--polarization", "2"], capsys)
    assert code == 0
    rows = json.loads(out)
    bym = {r["method"]: r for r in rows}
    assert bym["qexp"]["h_faltings"] == pytest.approx(
        bym["agm"]["h_faltings"], abs=1e-10)
    assert bym["qexp"]["h_K"] == pytest.approx(
        4 * (bym["qexp"]["h_faltings"] + 0.5 * 0.6931471805599453))


def test_faltings_nonminimal_exits_2(capsys):
    code, _, err = run(["faltings", "--a-invariants", "0,0,1,-1,0",
                        "--delta-min", "38"], capsys)
    assert code == 2 and "NonMinimalModel" in err


def test_validate_roundtrip(tmp_path, capsys):
    m = build_p1_fs()
    path = tmp_path / "model.json"
    m.save(path)
    code, out, _ = run(["validate", "--model", str(path), "--emit", "json"],
                       capsys)
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["check"] == "ok" and rows[0]["Sbar"] == "2"


def test_validate_missing_file_exits_2(capsys):
    code, _, _ = run(["validate", "--model", "/nonexistent.json"], capsys)
    assert code == 2


def test_numeric_failure_exits_3(tmp_path, capsys):
    gram = tmp_path / "g.json"
    gram.write_text(json.dumps([[1.0, 0.0], [0.0, -1.0]]))
    code, _, err = run(["balanced", "--family", "p1-fs", "--m", "1",
                        "--gram", str(gram), "--grid", "64"], capsys)
    assert code == 3 and "numeric failure" in err
    assert "NonPositiveDefinite" in err


def test_deterministic_output(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path in (a, b):
        code, _, _ = run(["scan", "--family", "p1-fs", "--m-max", "15",
                          "--out", str(path), "--emit", "json"], capsys)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
