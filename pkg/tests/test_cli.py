import json
import subprocess
import sys

import numpy as np
import pytest

from peikonal import __version__, io
from peikonal.cli import run


@pytest.fixture
def path_graph(tmp_path):
    path = tmp_path / "g.tsv"
    path.write_text("#n=3\n0\t1\t1\n1\t0\t1\n1\t2\t1\n2\t1\t1\n")
    return path


def summary(out, name):
    return json.loads((out / f"{name}.json").read_text())


def test_solve_path(tmp_path, path_graph, capsys):
    out = tmp_path / "out"
    code = run(["--out-dir", str(out), "solve", "--graph", str(path_graph), "--boundary", "0",
                "--f", "const:1", "--p", "1"])
    assert code == 0
    assert np.array_equal(io.read_vector(out / "solution.csv"), [0, 1, 2])
    s = summary(out, "solve")
    assert s["version"] == __version__
    assert s["config"]["p"] == 1.0 and s["config"]["boundary"] == [0]
    assert json.loads(capsys.readouterr().out) == s


def test_dijkstra_with_rhs_file(tmp_path, path_graph):
    (tmp_path / "f.csv").write_text("1\n1\n3\n")
    out = tmp_path / "o"
    assert run(["dijkstra", "--graph", str(path_graph), "--boundary", "0",
                "--f", f"file:{tmp_path / 'f.csv'}", "--out-dir", str(out)]) == 0
    assert np.array_equal(io.read_vector(out / "distance.csv"), [0, 1, 4])


def test_betastar(tmp_path, capsys):
    assert run(["--out-dir", str(tmp_path), "betastar", "--beta", "x,2;0.125,x"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["beta_star"] == pytest.approx(0.5, rel=1e-12)
    assert res["beta_star_minmax"] == pytest.approx(0.5, rel=1e-9)


def test_generate_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert run(["generate", "two-moons", "--n", "2000", "--seed", "7", "--out-dir", str(tmp_path / name)]) == 0
    for f in ("points.csv", "labels.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_pipeline(tmp_path):
    out = str(tmp_path)
    assert run(["--out-dir", out, "generate", "two-moons", "--n", "400", "--seed", "1"]) == 0
    assert run(["--out-dir", out, "graph-build", "--points", f"{out}/points.csv", "--k", "10"]) == 0
    g = f"{out}/graph.tsv"
    assert run(["--out-dir", out, "ssl", "--graph", g, "--labels", f"{out}/labels.csv",
                "--train-per-class", "3", "--priors", "0.5,0.5",
                "--f", "density:1", "--points", f"{out}/points.csv"]) == 0
    s = summary(tmp_path, "ssl")
    assert 0.5 <= s["accuracy"] <= 1.0 and len(s["train"]) == 6
    assert run(["--out-dir", out, "depth", "--graph", g, "--fraction", "0.1"]) == 0
    d = summary(tmp_path, "depth")
    assert d["deepest"] == d["median"]
    assert run(["--out-dir", out, "robustness", "--graph", g, "--boundary", "0,1", "--corrupt", "5"]) == 0
    assert summary(tmp_path, "robustness")["violations"] == 0
    assert run(["--out-dir", out, "solve", "--graph", g, "--boundary-labels", f"{out}/labels.csv",
                "--boundary-class", "1", "--p", "2"]) == 0


def test_proximity_and_convergence(tmp_path):
    out = str(tmp_path)
    assert run(["--out-dir", out, "generate", "ball", "--n", "300", "--d", "2"]) == 0
    assert run(["--out-dir", out, "graph-build", "--points", f"{out}/points.csv", "--kind", "proximity",
                "--eps", "0.3", "--normalization", "raw"]) == 0
    assert run(["--out-dir", out, "convergence", "--n-list", "200,400", "--eps-rule", "const:0.3"]) == 0
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    assert lines[0] == "n,eps,p,sup_error,runtime_s" and len(lines) == 3


def test_config_file(tmp_path, path_graph):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("p=2\nf=const:4\nboundary=0\n")
    out = tmp_path / "o"
    assert run(["solve", "--graph", str(path_graph), "--config", str(cfg), "--out-dir", str(out)]) == 0
    s = summary(out, "solve")
    assert s["config"]["p"] == 2.0 and s["config"]["f"] == "const:4"
    # the recorded config reproduces the run
    lines = [f"{k}={v if not isinstance(v, list) else ','.join(map(str, v))}"
             for k, v in s["config"].items() if k not in ("command",) and v is not None]
    cfg2 = tmp_path / "again.cfg"
    cfg2.write_text("\n".join(lines) + "\n")
    out2 = tmp_path / "o2"
    assert run(["solve", "--graph", str(path_graph), "--config", str(cfg2), "--out-dir", str(out2)]) == 0
    assert (out / "solution.csv").read_bytes() == (out2 / "solution.csv").read_bytes()
    assert summary(out2, "solve")["config"] | {"out_dir": ""} == s["config"] | {"out_dir": ""}


def test_exit_codes(tmp_path, path_graph):
    assert run(["solve", "--graph", str(path_graph)]) == 1  # no boundary
    assert run(["nonsense"]) == 1
    assert run(["solve", "--graph", str(path_graph), "--boundary", "0", "--bogus"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus=1\n")
    assert run(["solve", "--graph", str(path_graph), "--boundary", "0", "--config", str(bad)]) == 1
    assert run(["solve", "--graph", str(tmp_path / "missing.tsv"), "--boundary", "0"]) == 2
    assert run(["solve", "--graph", str(path_graph), "--boundary", "0", "--p", "0.5"]) == 1
    assert run(["--out-dir", str(tmp_path), "solve", "--graph", str(path_graph), "--boundary", "0",
                "--p", "2", "--f", "const:1e300", "--tol", "1e-9"]) in (0, 3)


def test_solver_error_exit_code(tmp_path, path_graph, monkeypatch):
    from peikonal import cli
    from peikonal.errors import NoUpwindDataError

    def boom(*a, **k):
        raise NoUpwindDataError("no upwind data at node 2")

    monkeypatch.setattr(cli, "solve_peikonal", boom)
    assert run(["--out-dir", str(tmp_path), "solve", "--graph", str(path_graph), "--boundary", "0"]) == 3


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "peikonal.cli", "--out-dir", str(tmp_path),
                          "betastar", "--beta", "x,1;1,x"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["beta_star"] == 1.0
