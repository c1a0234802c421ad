import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from mdiew.cli import main
from mdiew.reference import werner_coefficient_matrix
from mdiew.witness import werner_witness


def write_scenario(path, **overrides):
    scenario = {
        "schema_version": 1,
        "state": {"name": "werner", "p": 0.9},
        "witness": {"name": "werner"},
        "basis": "default",
        "measurement": {"kind": "ideal"},
        "scheme": "all",
        "shots": 4000,
        "trials": 8,
        "seed": 42,
    }
    scenario.update(overrides)
    path.write_text(json.dumps(scenario))
    return path


def test_reproduce_passes_quickly(capsys):
    start = time.perf_counter()
    code = main(["reproduce"])
    elapsed = time.perf_counter() - start
    out = capsys.readouterr().out
    assert code == 0
    assert elapsed < 10.0
    assert "all reference values reproduced" in out
    assert out.count("ok  ") >= 6


def test_reproduce_fails_under_perturbation(capsys):
    code = main(["reproduce", "--perturb", "1e-3"])
    out = capsys.readouterr()
    assert code == 1
    assert "FAIL" in out.out


def test_reproduce_writes_report(tmp_path, capsys):
    out_dir = tmp_path / "rep"
    code = main(["reproduce", "--out", str(out_dir)])
    capsys.readouterr()
    assert code == 0
    payload = json.loads((out_dir / "reproduce-report.json").read_text())
    assert payload["passed"] is True
    assert (out_dir / "reproduce-deltas.png").exists()


def test_simulate_deterministic_outputs(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "scenario.json")
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert main(["simulate", str(scenario), "--out", str(out1)]) == 0
    assert main(["simulate", str(scenario), "--out", str(out2)]) == 0
    capsys.readouterr()
    report1 = (out1 / "simulate-report.json").read_bytes()
    report2 = (out2 / "simulate-report.json").read_bytes()
    assert report1 == report2
    assert (out1 / "simulate-trials.csv").read_bytes() == (out2 / "simulate-trials.csv").read_bytes()
    assert (out1 / "simulate-estimates.png").exists()
    payload = json.loads(report1)
    assert payload["seed"] == 42
    assert payload["generator"] == "numpy-pcg64"
    assert payload["exact_all_outcome_value"] == pytest.approx(-1.7, abs=1e-9)


def test_simulate_single_scheme_reference_value(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "scenario.json", scheme="single", trials=6)
    out_dir = tmp_path / "single"
    assert main(["simulate", str(scenario), "--out", str(out_dir)]) == 0
    capsys.readouterr()
    payload = json.loads((out_dir / "simulate-report.json").read_text())
    assert payload["exact_all_outcome_value"] == pytest.approx(-1.7, abs=1e-9)
    # the single-outcome estimator targets the all-outcome value / 4^N
    assert payload["exact_scheme_value"] == pytest.approx(-1.7 / 16, abs=1e-12)
    assert abs(payload["mean_value"] - payload["exact_scheme_value"]) < 0.05


def test_simulate_scheme_both(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "scenario.json", scheme="both",
                              g_grid=[500, 2000], trials=10)
    out_dir = tmp_path / "cmp"
    assert main(["simulate", str(scenario), "--out", str(out_dir)]) == 0
    capsys.readouterr()
    payload = json.loads((out_dir / "comparison-report.json").read_text())
    assert payload["kind"] == "scheme-comparison"
    for g_index in range(2):
        assert (payload["schemes"]["all"]["mean_p_value"][g_index]
                <= payload["schemes"]["single"]["mean_p_value"][g_index])
    assert (out_dir / "comparison-trials.csv").exists()
    assert (out_dir / "comparison.png").exists()


def test_simulate_separable_state_never_significant(tmp_path, capsys):
    # untrusted noisy devices on a separable state: no run may look like a
    # confident detection
    scenario = write_scenario(
        tmp_path / "scenario.json",
        state={"name": "werner", "p": 0.2},
        measurement={"kind": "noisy", "visibility": 0.8},
        shots=2000, trials=100,
    )
    out_dir = tmp_path / "sep"
    assert main(["simulate", str(scenario), "--out", str(out_dir)]) == 0
    capsys.readouterr()
    rows = (out_dir / "simulate-trials.csv").read_text().strip().splitlines()[1:]
    assert len(rows) == 100
    p_values = [float(r.split(",")[3]) for r in rows]
    assert min(p_values) >= 1e-3


def test_simulate_random_devices(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "scenario.json",
                              measurement={"kind": "random", "seed": 7}, trials=4)
    out_dir = tmp_path / "rand"
    assert main(["simulate", str(scenario), "--out", str(out_dir)]) == 0
    capsys.readouterr()
    payload = json.loads((out_dir / "simulate-report.json").read_text())
    assert payload["measurement"] == "random(seed=7)"


def test_simulate_bad_inputs(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["simulate", str(missing), "--out", str(tmp_path / "o1")]) == 2
    bad_state = write_scenario(tmp_path / "bad1.json", state={"name": "ghz"})
    assert main(["simulate", str(bad_state), "--out", str(tmp_path / "o2")]) == 2
    mismatch = write_scenario(tmp_path / "bad2.json", witness={"name": "w-depth"})
    assert main(["simulate", str(mismatch), "--out", str(tmp_path / "o3")]) == 2
    not_json = tmp_path / "bad3.json"
    not_json.write_text("{broken")
    assert main(["simulate", str(not_json), "--out", str(tmp_path / "o4")]) == 2
    capsys.readouterr()


def test_verify_mdi_quick(tmp_path, capsys):
    out_dir = tmp_path / "mdi"
    code = main(["verify-mdi", "--trials", "25", "--seed", "9", "--out", str(out_dir)])
    out = capsys.readouterr().out
    assert code == 0
    assert "seed 9" in out
    payload = json.loads((out_dir / "verify-mdi-report.json").read_text())
    assert payload["total_violations"] == 0
    assert payload["overall_min_value"] >= -1e-7
    assert payload["seed"] == 9
    assert len(payload["batteries"]) == 4
    assert (out_dir / "verify-mdi-values.png").exists()
    assert (out_dir / "verify-mdi-batteries.csv").exists()


def test_depth_scan(tmp_path, capsys):
    out_dir = tmp_path / "depth"
    code = main(["depth", "--alphas", "2/3,4/9", "--p-grid", "0,0.5,13/21,0.9,1", "--out", str(out_dir)])
    capsys.readouterr()
    assert code == 0
    payload = json.loads((out_dir / "depth-report.json").read_text())
    rows = payload["rows"]
    assert len(rows) == 10
    full = next(r for r in rows if r["alpha"] == pytest.approx(2 / 3) and r["p"] == 1.0)
    assert full["detected"] is True and full["implied_depth"] == 3
    noise = next(r for r in rows if r["alpha"] == pytest.approx(2 / 3) and r["p"] == 0.0)
    assert noise["detected"] is False
    assert (out_dir / "depth-scan.csv").exists()
    assert (out_dir / "depth-scan.png").exists()


def test_depth_bad_grid(capsys):
    assert main(["depth", "--p-grid", "0,2.0"]) == 2
    assert main(["depth", "--alphas", "abc"]) == 2
    capsys.readouterr()


def test_decompose_named_witness(capsys):
    code = main(["decompose", "--witness", "werner", "--outcome", "1,2"])
    out = capsys.readouterr().out
    assert code == 0
    payload = json.loads(out)
    got = np.array([[float(v) for v in row] for row in payload["coefficients"]])
    assert np.max(np.abs(got - werner_coefficient_matrix((1, 2)))) <= 1e-9


def test_decompose_full_table(capsys):
    code = main(["decompose", "--witness", "w-depth", "--alpha", "2/3"])
    out = capsys.readouterr().out
    assert code == 0
    payload = json.loads(out)
    assert len(payload["tables"]) == 64
    assert payload["party_count"] == 3


def test_decompose_matrix_file(tmp_path, capsys):
    op = werner_witness().operator
    raw = [[[float(v.real), float(v.imag)] for v in row] for row in op]
    path = tmp_path / "witness.json"
    path.write_text(json.dumps(raw))
    code = main(["decompose", "--witness", str(path), "--outcome", "1,1"])
    out = capsys.readouterr().out
    assert code == 0
    payload = json.loads(out)
    got = np.array([[float(v) for v in row] for row in payload["coefficients"]])
    assert np.max(np.abs(got - werner_coefficient_matrix((1, 1)))) <= 1e-9


def test_cli_runs_as_a_subprocess(tmp_path):
    env = dict(os.environ)
    src = os.path.join(os.path.dirname(__file__), "..", "src")
    env["PYTHONPATH"] = os.path.abspath(src) + os.pathsep + env.get("PYTHONPATH", "")
    ok = subprocess.run(
        [sys.executable, "-m", "mdiew.cli", "decompose", "--witness", "werner", "--outcome", "1,1"],
        capture_output=True, text=True, env=env,
    )
    assert ok.returncode == 0
    payload = json.loads(ok.stdout)
    assert payload["outcome"] == "1,1"
    bad = subprocess.run(
        [sys.executable, "-m", "mdiew.cli", "simulate", str(tmp_path / "missing.json")],
        capture_output=True, text=True, env=env,
    )
    assert bad.returncode == 2
    assert "error:" in bad.stderr


def test_figures_have_content(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "scenario.json", trials=5, shots=1000)
    out_dir = tmp_path / "fig"
    assert main(["simulate", str(scenario), "--out", str(out_dir)]) == 0
    capsys.readouterr()
    png = out_dir / "simulate-estimates.png"
    assert png.stat().st_size > 5000
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_decompose_rejects_bad_witness(tmp_path, capsys):
    path = tmp_path / "identity.json"
    eye = [[[1.0, 0.0] if i == j else [0.0, 0.0] for j in range(4)] for i in range(4)]
    path.write_text(json.dumps(eye))
    assert main(["decompose", "--witness", str(path), "--outcome", "1,1"]) == 2
    assert main(["decompose", "--witness", "werner", "--outcome", "1,2,3"]) == 2
    assert main(["decompose", "--witness", "werner", "--outcome", "0,5"]) == 2
    capsys.readouterr()
