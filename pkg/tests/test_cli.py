import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from speclab.cli import main
from speclab.mesh import read_fmesh


def _run(*args):
    return main([str(a) for a in args])


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def test_mesh_annulus_two_loops(tmp_path):
    out = tmp_path / "a.fmesh"
    assert _run("mesh", "--domain", "annulus", "--param", "0.5,1.0", "--h", 0.2, "--out", out) == 0
    assert len(read_fmesh(out).loops) == 2


def test_mesh_cap_records_alpha(tmp_path):
    out = tmp_path / "c.fmesh"
    assert _run("mesh", "--domain", "cap", "--param", "1.5708", "--h", 0.1, "--out", out) == 0
    m = read_fmesh(out)
    assert m.metric.kind == "cap" and m.metric.alpha == 1.5708


def test_mesh_rerun_byte_identical(tmp_path):
    out = tmp_path / "d.fmesh"
    args = ("mesh", "--domain", "disk", "--h", 0.2, "--out", out)
    _run(*args)
    first = out.read_bytes()
    _run(*args)
    assert out.read_bytes() == first


def test_solve_bs_disk(tmp_path):
    out = tmp_path / "s.json"
    assert _run("solve", "--domain", "disk", "--h", 0.2, "--problem", "bs", "--p", 0, "--k", 3, "--out", out) == 0
    data = json.loads(out.read_text())
    q = np.array(data["eigenvalues"])
    assert len(q) == 3 and np.all(q > 0) and np.all(np.diff(q) >= 0)
    assert data["run_config"]["problem"] == "bs" and "mesh" in data["input_hashes"]


def test_solve_robin_zero_equals_neumann(tmp_path):
    common = ("solve", "--domain", "disk", "--h", 0.25, "--p", 1, "--k", 4)
    _run(*common, "--problem", "robin", "--tau", 0, "--out", tmp_path / "r.json")
    _run(*common, "--problem", "neumann", "--out", tmp_path / "n.json")
    r = np.array(json.loads((tmp_path / "r.json").read_text())["eigenvalues"])
    n = np.array(json.loads((tmp_path / "n.json").read_text())["eigenvalues"])
    assert np.max(np.abs(r - n)) <= 1e-12 * np.max(np.abs(n))


def test_solve_dtn_kernel(tmp_path):
    out = tmp_path / "t.json"
    _run("solve", "--domain", "disk", "--h", 0.2, "--problem", "dtn", "--k", 3, "--out", out)
    assert abs(json.loads(out.read_text())["eigenvalues"][0]) <= 1e-8


def test_solve_csv(tmp_path):
    _run("solve", "--domain", "square", "--h", 0.3, "--problem", "dirichlet", "--k", 2,
         "--out", tmp_path / "o.json", "--csv", tmp_path / "o.csv")
    rows = _read_csv(tmp_path / "o.csv")
    assert [r["index"] for r in rows] == ["1", "2"]


def test_config_replay(tmp_path):
    first = tmp_path / "first.json"
    _run("solve", "--domain", "ellipse", "--param", "1.0,0.6", "--h", 0.3, "--problem", "neumann",
         "--p", 1, "--k", 3, "--seed", 5, "--out", first)
    again = tmp_path / "again.json"
    assert _run("solve", "--config", first, "--out", again) == 0
    a, b = json.loads(first.read_text()), json.loads(again.read_text())
    assert a["eigenvalues"] == b["eigenvalues"] and b["run_config"]["seed"] == 5


@pytest.mark.parametrize("args", [
    ("mesh", "--domain", "disk", "--h", "-0.1"),
    ("mesh", "--domain", "annulus", "--param", "1.0,0.5", "--h", "0.2"),
    ("solve", "--domain", "disk", "--h", "0.2", "--problem", "robin"),
    ("solve", "--domain", "disk", "--h", "0.2"),
    ("solve", "--domain", "torus", "--h", "0.2", "--problem", "bs"),
])
def test_usage_errors_exit_2(args, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(list(args))
        raise SystemExit(code)
    assert exc.value.code == 2


def test_solver_error_exit_3(tmp_path, capsys):
    code = _run("solve", "--domain", "disk", "--h", 0.3, "--problem", "dtn", "--p", 2, "--out", tmp_path / "x.json")
    assert code == 3
    assert capsys.readouterr().err.startswith("UnsupportedDegree:")


def test_verify_failure_exit_4(tmp_path):
    out = tmp_path / "v.json"
    code = _run("verify", "--domain", "disk", "--h", 0.3, "--suite", "robin_dirichlet_neumann", "--out", out)
    data = json.loads(out.read_text())
    assert "FAIL" in [r["verdict"] for r in data["reports"]] and code == 4


def test_verify_pass_exit_0(tmp_path):
    out = tmp_path / "v.json"
    assert _run("verify", "--domain", "disk", "--h", 0.3, "--suite", "upper_bound_ratio", "--out", out) == 0
    assert {r["verdict"] for r in json.loads(out.read_text())["reports"]} == {"EQUALITY"}


def test_sweep_bs_disk(tmp_path):
    out = tmp_path / "s.csv"
    plot = tmp_path / "s.dat"
    assert _run("sweep", "--domain", "disk", "--h", 0.2, "--problem", "bs", "--csv", out, "--plot", plot) == 0
    rows = _read_csv(out)
    assert list(rows[0]) == ["h", "value", "extrapolated", "order"] and len(rows) == 3
    assert abs(float(rows[-1]["extrapolated"]) / 2 - 1) < 2e-2
    data = [l for l in plot.read_text().splitlines() if not l.startswith("#")]
    assert len(data) == 3 and all(len(l.split()) == 2 for l in data)


def test_sweep_robin_taus_monotone(tmp_path):
    out = tmp_path / "r.csv"
    _run("sweep", "--domain", "disk", "--h", 0.3, "--problem", "robin", "--p", 1,
         "--taus", "0.1,1,10,10000", "--csv", out)
    rows = _read_csv(out)
    assert list(rows[0]) == ["tau", "h", "value", "extrapolated", "order"]
    assert np.all(np.diff([float(r["value"]) for r in rows]) >= 0)


def test_sweep_serrin_decreasing(tmp_path):
    out = tmp_path / "c.csv"
    _run("sweep", "--domain", "disk", "--h", 0.2, "--problem", "serrin", "--csv", out)
    vals = [float(r["value"]) for r in _read_csv(out)]
    assert vals[0] > vals[1] > vals[2]


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "speclab.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("speclab")
