import json
import subprocess
import sys

import pytest

from marp.cli import main
from marp.instance import load_instance, save_instance
from marp.solvers import Solution, save_solution

from conftest import instance_from_routes


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def demo_file(workdir):
    save_instance(instance_from_routes([[0, 1, 2], [2, 3]]), "demo.json")
    return "demo.json"


def test_generate(workdir):
    assert main(["generate", "--kind", "grid", "--size", "3", "--vehicles", "1", "--seed", "0", "--out", "g.json"]) == 0
    inst = load_instance("g.json")
    assert inst.network.n_nodes == 9 and inst.n_vehicles == 1
    first = (workdir / "g.json").read_bytes()
    assert main(["generate", "--kind", "grid", "--size", "3", "--vehicles", "1", "--seed", "0", "--out", "g.json"]) == 0
    assert (workdir / "g.json").read_bytes() == first
    manifest = json.loads((workdir / "g.json.manifest.json").read_text())
    assert manifest["command"] == "generate" and manifest["seeds"] == [0]


def test_generate_zero_vehicles(workdir):
    assert main(["generate", "--size", "3", "--vehicles", "0", "--out", "g.json"]) == 2


def test_build_prints_lambda(demo_file, capsys):
    assert main(["build", "--instance", demo_file, "--regime", "soft", "--out", "s.qubo"]) == 0
    assert capsys.readouterr().out.strip() == "0.666667"
    assert main(["build", "--instance", demo_file, "--regime", "hard", "--out", "h.qubo"]) == 0
    assert capsys.readouterr().out.strip() == "4"


def test_build_custom_needs_lambda(demo_file):
    assert main(["build", "--instance", demo_file, "--regime", "custom", "--out", "c.qubo"]) == 2


def test_build_coverage_csv(demo_file, workdir):
    assert main(["build", "--instance", demo_file, "--regime", "hard", "--coverage-csv", "cov.csv",
                 "--out", "h.qubo"]) == 0
    assert (workdir / "cov.csv").read_text() == "0,2\n1,1\n0,1,1\n"


def test_solve_exact_demo(demo_file, workdir):
    main(["build", "--instance", demo_file, "--regime", "custom", "--lambda", "0.5", "--out", "d.qubo"])
    assert main(["solve", "--qubo", "d.qubo", "--solver", "exact", "--out", "d.sol.json"]) == 0
    doc = json.loads((workdir / "d.sol.json").read_text())
    assert doc["energy"] == -2.5 and doc["x"] == [1, 1]


def test_solve_sa_repeatable(demo_file, workdir):
    main(["generate", "--size", "6", "--vehicles", "15", "--seed", "3", "--out", "i.json"])
    main(["build", "--instance", "i.json", "--regime", "soft", "--out", "i.qubo"])
    args = ["solve", "--qubo", "i.qubo", "--solver", "sa", "--seed", "5", "--num-reads", "10", "--sweeps", "200"]
    assert main(args + ["--out", "a.json"]) == 0
    assert main(args + ["--out", "b.json"]) == 0
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()


def test_solve_exit_codes(workdir):
    (workdir / "big.qubo").write_text("p qubo 0 31 31 0\n" + "".join(f"{i} {i} -1\n" for i in range(31)))
    assert main(["solve", "--qubo", "big.qubo", "--solver", "exact", "--out", "x.json"]) == 4
    (workdir / "bad.qubo").write_text("p qubo 0 2 1 0\n5 5 -1\n")
    assert main(["solve", "--qubo", "bad.qubo", "--solver", "exact", "--out", "x.json"]) == 3
    assert main(["solve", "--qubo", "missing.qubo", "--out", "x.json"]) == 2


def test_evaluate(demo_file, workdir):
    save_solution(Solution((1, 0), -2.0, "exact"), "one.json")
    assert main(["evaluate", "--instance", demo_file, "--solution", "one.json", "--lambda-regime", "hard",
                 "--out", "m.csv"]) == 0
    header, row = (workdir / "m.csv").read_text().splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    assert values["pct_cov"] == "75" and values["pct_ov"] == "0" and values["energy"] == "-2"

    save_solution(Solution((1, 1), 0.0, "exact"), "all.json")
    main(["evaluate", "--instance", demo_file, "--solution", "all.json", "--out", "all.csv"])
    values = dict(zip(*[l.split(",") for l in (workdir / "all.csv").read_text().splitlines()]))
    assert values["pct_cov"] == values["pct_ov"] == values["pct_veh"] == "100"

    save_solution(Solution((0, 0), 0.0, "exact"), "none.json")
    assert main(["evaluate", "--instance", demo_file, "--solution", "none.json", "--out", "none.csv"]) == 0
    values = dict(zip(*[l.split(",") for l in (workdir / "none.csv").read_text().splitlines()]))
    assert values["pct_cov"] == values["avg_overlap"] == values["hhi"] == "0"


def test_evaluate_length_mismatch(demo_file):
    save_solution(Solution((1, 0, 1), 0.0, "exact"), "three.json")
    assert main(["evaluate", "--instance", demo_file, "--solution", "three.json", "--out", "m.csv"]) == 3


def test_invalid_instance_file(workdir):
    (workdir / "broken.json").write_text('{"seed": 0}')
    assert main(["build", "--instance", "broken.json", "--out", "x.qubo"]) == 3


def test_sweep_and_pareto(workdir, capsys):
    cfg = {"network": {"kind": "grid", "size": 8}, "fleet_sizes": [12], "lambda_values": [0.2, 2.0],
           "seeds": [0], "solver": "exact"}
    (workdir / "cfg.json").write_text(json.dumps(cfg))
    assert main(["sweep", "--config", "cfg.json", "--out-dir", "out"]) == 0
    lines = (workdir / "out" / "metrics.csv").read_text().splitlines()
    assert len(lines) == 3
    assert (workdir / "out" / "pareto.csv").exists() and (workdir / "out" / "manifest.json").exists()
    assert main(["pareto", "--rows", "out/metrics.csv", "--bins", "10-20", "--out", "p.csv"]) == 0
    rows = (workdir / "p.csv").read_text().splitlines()[1:]
    cov_ov = [(float(r[5]), float(r[6])) for r in (l.split(",") for l in lines[1:])]
    dominated = [a for a in cov_ov if any(b[0] >= a[0] and b[1] <= a[1] and b != a for b in cov_ov)]
    assert len(rows) == len(cov_ov) - len(dominated)


def test_sweep_missing_config(workdir):
    assert main(["sweep", "--config", "nope.json", "--out-dir", "out"]) == 2


def test_reduce_wsp(workdir, capsys):
    (workdir / "w.json").write_text(json.dumps({"universe_size": 3, "sets": [[0, 1], [1, 2], [2]],
                                                "weights": [5, 4, 3]}))
    assert main(["reduce-wsp", "--wsp", "w.json", "--check"]) == 0
    assert "PASS weight 8" in capsys.readouterr().out
    (workdir / "d.json").write_text(json.dumps({"universe_size": 4, "sets": [[0], [1], [2, 3]],
                                                "weights": [1, 2, 3]}))
    assert main(["reduce-wsp", "--wsp", "d.json", "--check"]) == 0
    assert "PASS weight 6" in capsys.readouterr().out
    (workdir / "big.json").write_text(json.dumps({"universe_size": 25, "sets": [[k] for k in range(25)],
                                                  "weights": [1] * 25}))
    assert main(["reduce-wsp", "--wsp", "big.json", "--check"]) == 4


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "marp.cli", "generate", "--size", "2", "--vehicles", "1",
                           "--out", str(tmp_path / "g.json")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
