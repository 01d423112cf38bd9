"""End-to-end checks of the command-line front end (in process)."""

import json
import math

import pytest

from compactfix.cli import main


def test_solve_writes_run_directory(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["solve", "--grid-step", "0.25", "--truncation", "4",
               "--out", str(out), "--no-timestamp"])
    assert rc == 0
    for name in ("solution.csv", "solution.csv.json", "convergence.csv",
                 "profile.csv", "summary.json"):
        assert (out / name).exists(), name
    summary = json.loads((out / "summary.json").read_text())
    assert summary["problem"] == "hyperbolic-erf"
    assert summary["config"]["rho_ball"] == 0.5
    assert summary["iterations"] >= 1
    assert "converged in" in capsys.readouterr().out


def test_solve_iteration_failure_exits_2(tmp_path, capsys):
    rc = main(["solve", "--grid-step", "0.5", "--truncation", "4",
               "--max-iter", "1", "--tol", "1e-30",
               "--out", str(tmp_path / "run")])
    assert rc == 2
    assert "solve failed" in capsys.readouterr().err


def test_solve_rejects_demo_problems(tmp_path, capsys):
    rc = main(["solve", "--problem", "arctan-demo",
               "--out", str(tmp_path / "run")])
    assert rc == 1
    assert "no solve branch" in capsys.readouterr().err


def test_check_conditions_report(tmp_path, capsys):
    out = tmp_path / "cones"
    rc = main(["check-conditions", "--rho-range", "0.15:0.85:0.05",
               "--truncation", "16", "--out", str(out), "--no-timestamp"])
    assert rc == 0
    doc = json.loads((out / "cone_report.json").read_text())
    assert set(doc) == {"problem", "hypotheses", "integrals", "rows",
                        "holding_interval"}
    assert doc["hypotheses"]["C4"]["status"] == "diverges"
    assert doc["integrals"]["M0*Phi_r"] == math.inf
    assert len(doc["rows"]) == 15
    assert all(row["holds"] for row in doc["rows"])
    lo, hi = doc["holding_interval"]
    assert lo == pytest.approx(0.15) and hi == pytest.approx(0.85)
    assert "index-one holds on" in capsys.readouterr().out


def test_check_conditions_single_rho(tmp_path):
    out = tmp_path / "single"
    rc = main(["check-conditions", "--rho", "0.5", "--out", str(out),
               "--no-timestamp"])
    assert rc == 0
    doc = json.loads((out / "cone_report.json").read_text())
    assert len(doc["rows"]) == 1
    assert doc["rows"][0]["holds"]


def test_check_conditions_rejects_bad_range(tmp_path, capsys):
    for bad in ("abc", "1:0.5:0.1", "0:1:-0.1"):
        rc = main(["check-conditions", "--rho-range", bad,
                   "--out", str(tmp_path / "x")])
        assert rc == 1
    assert "usage error" in capsys.readouterr().err


def test_ascoli_demo(tmp_path, capsys):
    out = tmp_path / "ascoli"
    rc = main(["ascoli-demo", "--out", str(out), "--no-timestamp"])
    assert rc == 0
    doc = json.loads((out / "ascoli_report.json").read_text())
    assert doc["bounded"] and doc["equicontinuous"]
    assert not doc["equiconvergent"]
    assert "equiconvergent: False" in capsys.readouterr().out
    rc = main(["ascoli-demo", "--problem", "bump-chain",
               "--out", str(out)])
    assert rc == 1


def test_compactify_demo_both_problems(tmp_path):
    out = tmp_path / "arctan"
    assert main(["compactify-demo", "--out", str(out),
                 "--no-timestamp"]) == 0
    doc = json.loads((out / "compactify_demo.json").read_text())
    assert doc["two_point"]["+inf"] == pytest.approx(math.pi / 2, abs=1e-6)
    assert doc["one_point"] == {"inf": "no_limit"}
    out2 = tmp_path / "bump"
    assert main(["compactify-demo", "--problem", "bump-chain",
                 "--out", str(out2), "--no-timestamp"]) == 0
    doc2 = json.loads((out2 / "compactify_demo.json").read_text())
    assert doc2["derivative"]["status"] == "no_limit"
    assert main(["compactify-demo", "--problem", "hyperbolic-erf",
                 "--out", str(tmp_path / "bad")]) == 1


def test_validate_closed_forms_pass_and_fail(tmp_path, capsys):
    out = tmp_path / "val"
    rc = main(["validate-closed-forms", "--grid-n", "5", "--out", str(out),
               "--no-timestamp"])
    assert rc == 0
    doc = json.loads((out / "validation.json").read_text())
    assert doc["pass"] is True
    assert all(g < 1e-6 for g in doc["gaps"].values())
    rc = main(["validate-closed-forms", "--grid-n", "5", "--tol", "1e-18",
               "--out", str(tmp_path / "val2"), "--no-timestamp"])
    assert rc == 2
    assert "OUTSIDE TOLERANCE" in capsys.readouterr().out


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main(["frobnicate"]) == 1
    assert main(["solve", "--frob"]) == 1
    assert main(["solve", "--problem", "nope",
                 "--out", str(tmp_path / "x")]) == 1
    assert main(["solve", "--problem-file", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "x")]) == 1
    assert "usage error" in capsys.readouterr().err


def test_no_timestamp_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["check-conditions", "--rho-range", "0.3:0.5:0.1",
            "--no-timestamp"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert (a / "cone_report.json").read_bytes() \
        == (b / "cone_report.json").read_bytes()
    stamped = tmp_path / "c"
    assert main(["check-conditions", "--rho", "0.5",
                 "--out", str(stamped)]) == 0
    doc = json.loads((stamped / "cone_report.json").read_text())
    assert "written_at" in doc
