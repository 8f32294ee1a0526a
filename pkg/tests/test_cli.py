import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from sparse_ising.cli import lambda_grid, main
from sparse_ising.io import embedding_to_json, hamiltonian_to_json, hardware_to_json, write_json


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def triangle_files(tmp_path, triangle):
    H_p, hw, emb = triangle
    paths = {name: tmp_path / f"{name}.json" for name in ("problem", "hardware", "embedding")}
    write_json(paths["problem"], hamiltonian_to_json(H_p))
    write_json(paths["hardware"], hardware_to_json(hw))
    write_json(paths["embedding"], embedding_to_json(emb))
    return ["--problem", str(paths["problem"]), "--hardware", str(paths["hardware"]),
            "--embedding", str(paths["embedding"])]


def test_lambda_grid():
    assert lambda_grid(0.1, 0.5, 0.1) == [0.1, 0.2, 0.3, 0.4, 0.5]
    assert len(lambda_grid(0.1, 5.0, 0.1)) == 50


def test_energy_of_configuration(capsys):
    code, out, _ = run(capsys, "energy", "--builtin", "triangle", "--spins", '{"1": 1, "2": 1, "3": 1}')
    assert code == 0
    assert json.loads(out)["energy"] == pytest.approx(-2.3)


def test_energy_spectrum(capsys, triangle_files):
    code, out, _ = run(capsys, "energy", *triangle_files)
    data = json.loads(out)
    assert code == 0
    assert data["ground_energy"] == pytest.approx(-2.3) and data["degeneracy"] == 2


def test_pipeline_json_and_csv(capsys):
    code, out, _ = run(capsys, "pipeline", "--builtin", "star", "--star-l", "1", "--lambda", "0", "--beta", "1")
    assert code == 0
    assert json.loads(out)["p_cc"] == pytest.approx(0.3317851178069587, abs=1e-12)
    code, out, _ = run(capsys, "pipeline", "--builtin", "star", "--lambda", "3", "--format", "csv")
    row = _rows(out)[0]
    assert float(row["scale"]) == 1.5


def test_sweep_peak(capsys, triangle_files):
    code, out, _ = run(capsys, "sweep", *triangle_files, "--beta", "4", "--lambda-grid", "0.1", "5", "0.1")
    rows = _rows(out)
    assert code == 0 and len(rows) == 50
    assert list(rows[0]) == ["lambda", "scale", "beta_eff", "p_cc", "p_solve_eff", "p_sparse",
                             "break_1", "break_2", "break_3", "p_cc_x_p_solve_eff"]
    p = np.array([float(r["p_sparse"]) for r in rows])
    lam = float(rows[int(np.argmax(p))]["lambda"])
    assert 1.5 <= lam <= 2.5
    assert p[0] < p.max() > p[-1]


def test_sweep_output_file(capsys, tmp_path):
    target = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--builtin", "triangle", "--lambda-grid", "0", "1", "0.5", "--out", str(target))
    assert code == 0 and out == ""
    assert len(_rows(target.read_text())) == 3


def test_mcmc_sweep_is_seeded(capsys, monkeypatch):
    args = ["sweep", "--builtin", "triangle", "--lambda-grid", "1", "1", "1", "--mode", "mcmc",
            "--sweeps", "50", "--burn-in", "10", "--chains", "2"]
    _, a, _ = run(capsys, *args, "--seed", "5")
    _, b, _ = run(capsys, *args, "--seed", "5")
    _, c, _ = run(capsys, *args, "--seed", "6")
    assert a == b and a != c
    monkeypatch.setenv("SPARSE_ISING_SEED", "5")
    _, d, _ = run(capsys, *args)
    assert d == a


def test_star_scan_degree_axis(capsys, tmp_path):
    summary = tmp_path / "summary.json"
    code, out, _ = run(capsys, "star-scan", "--thresholds", "0.5", "--summary", str(summary))
    rows = _rows(out)
    assert code == 0 and len(rows) == 5
    slope = json.loads(summary.read_text())["slopes"]["0.5"]["slope"]
    assert 0.4 <= slope <= 0.6


def test_star_scan_reports_trivial_and_unreachable_thresholds(capsys):
    code, out, err = run(capsys, "star-scan", "--degrees", "2", "4", "--thresholds", "0.02", "0.99")
    rows = _rows(out)
    assert code == 0
    assert {r["note"] for r in rows if r["threshold"] == "0.02"} == {"already satisfied at lambda=0"}
    assert all(r["note"].startswith("unreachable") for r in rows if r["threshold"] == "0.99")
    assert json.loads(err)["axis"] == "degree"


def test_star_scan_chain_length_axis(capsys):
    code, out, err = run(capsys, "star-scan", "--thresholds", "0.5", "--chain-lengths", "2", "3", "4")
    rows = _rows(out)
    assert code == 0
    assert [r["chain_length"] for r in rows] == ["2", "3", "4"]
    assert json.loads(err)["axis"] == "chain_length"


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--builtin", "triangle", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert data["max"]["conductance_bound"] == pytest.approx(0.75)
    code, out, _ = run(capsys, "bounds", "--builtin", "triangle")
    assert out.splitlines()[0].startswith("chain\tvolume")


def test_verify_exit_code_tracks_report(capsys):
    code, out, err = run(capsys, "verify", "--instances", "3", "--seed", "1")
    report = json.loads(out)
    assert code == (0 if report["passed"] else 1)
    assert {f["family"] for f in report["families"]} >= {"decomposition", "cheeger", "rescaling"}
    assert "decomposition" in err


def test_exit_codes(capsys, tmp_path, triangle_files):
    assert run(capsys, "energy", "--problem", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "energy", "--builtin", "triangle", "--limit", "2")[0] == 3
    bad = tmp_path / "emb.json"
    bad.write_text(json.dumps({"chains": {"1": ["p1", "p5"], "2": ["p3"], "3": ["p6"]}}))
    args = list(triangle_files)
    args[args.index("--embedding") + 1] = str(bad)
    code, _, err = run(capsys, "pipeline", *args, "--lambda", "1")
    assert code == 1 and "disconnected" in err
    assert run(capsys, "sweep", "--builtin", "triangle", "--lambda-grid", "1", "0", "0.1")[0] == 1
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--builtin", "triangle"])
    assert info.value.code == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sparse_ising", "energy", "--builtin", "star", "--star-l", "1"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["degeneracy"] == 4
