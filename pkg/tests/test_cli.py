import json

import pytest

from netbargain.cli import main
from netbargain.instance import dumps, loads


@pytest.fixture
def e2_file(tmp_path, e2):
    path = tmp_path / "e2.json"
    path.write_text(dumps(e2))
    return str(path)


def test_generate_e2_document(capsys):
    rc = main(["generate", "--topology", "path", "--len", "3", "--weights", "2,1"])
    assert rc == 0
    inst = loads(capsys.readouterr().out)
    assert inst.edges == ((0, 1, 2.0), (1, 2, 1.0))


def test_generate_deterministic(capsys):
    args = ["generate", "--topology", "blossom", "--stem", "2", "--cycle", "5", "--seed", "7"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_generate_bad_topology():
    assert main(["generate", "--topology", "moebius"]) == 2


def test_run_writes_snapshot_and_trace(tmp_path, e2_file, capsys):
    trace = tmp_path / "trace.csv"
    out = tmp_path / "snap.json"
    rc = main(
        ["run", "--input", e2_file, "--kappa", "0.5", "--trace", str(trace),
         "--output", str(out), "--margin", "0.1667"]
    )
    assert rc == 0
    lines = trace.read_text().splitlines()
    assert lines[0] == "t,step_change,u_g,u_gf"
    snap = json.loads(out.read_text())
    assert snap["converged"] is True
    alpha = {(rec["from"], rec["to"]): float(rec["value"]) for rec in snap["alpha"]}
    assert alpha[(1, 0)] == pytest.approx(1.0, abs=1e-6)
    assert "pairs=[(0, 1)]" in capsys.readouterr().out


def test_verify_e2(e2_file, capsys):
    assert main(["verify", "--input", e2_file]) == 0
    out = capsys.readouterr().out
    assert "gamma: [0.5, 1.5, 0.0]" in out
    assert "gap: 0.5" in out
    assert "pairs=[(0, 1)]" in out


def test_verify_triangle(tmp_path, t1, capsys):
    path = tmp_path / "t1.json"
    path.write_text(dumps(t1))
    assert main(["verify", "--input", str(path)]) == 0
    out = capsys.readouterr().out
    assert "pointed, not tight" in out


def test_verify_degenerate(tmp_path, capsys):
    doc = {"nodes": 3, "edges": [{"u": 0, "v": 1, "w": 1}, {"u": 1, "v": 2, "w": 1}]}
    path = tmp_path / "deg.json"
    path.write_text(json.dumps(doc))
    assert main(["verify", "--input", str(path)]) == 0
    out = capsys.readouterr().out
    assert "degenerate LP" in out


def test_verify_bad_instance(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"nodes": 2, "edges": [{"u": 0, "v": 1, "w": 0}]}')
    assert main(["verify", "--input", str(path)]) == 2


def test_verify_missing_file():
    assert main(["verify", "--input", "/nonexistent/x.json"]) == 2


def test_decompose_report(e2_file, capsys):
    assert main(["decompose", "--input", e2_file]) == 0
    out = capsys.readouterr().out
    assert "sigma=0.5" in out and "gap: 0.5" in out


def test_experiment_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    rc = main(
        ["experiment", "--topology", "path", "--sizes", "3,5", "--eps", "1e-3",
         "--output", str(out), "--seed", "1"]
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,W,sigma,eps,iterations_to_eps,t_star_reference,seed,converged"
    assert len(lines) == 3
    assert "log-log fit" in capsys.readouterr().out


def test_bipartite_report(tmp_path, b1, capsys):
    path = tmp_path / "b1.json"
    path.write_text(dumps(b1))
    assert main(["bipartite", "--input", str(path)]) == 0
    out = capsys.readouterr().out
    assert "buyer-optimal: gamma=[9.0, 1.0, 9.0, 1.0]" in out
    assert "seller-optimal: gamma=[1.0, 9.0, 1.0, 9.0]" in out
    assert "dominates" in out


def test_bipartite_rejects_triangle(tmp_path, t1, capsys):
    path = tmp_path / "t1.json"
    path.write_text(dumps(t1))
    assert main(["bipartite", "--input", str(path)]) == 1
    assert "witness odd cycle" in capsys.readouterr().err


def test_pathlab_on_e2(e2_file, capsys):
    rc = main(["pathlab", "--input", e2_file, "--horizon", "400"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "sandwich holds" in out
    assert "mass stationary: True" in out
    assert "dominated by mass: True" in out


def test_verify_beyond_cap(tmp_path, capsys):
    from netbargain.experiment import family_spec
    from netbargain.instance import generate

    inst = generate(family_spec("path", 20, seed=1))
    path = tmp_path / "big.json"
    path.write_text(dumps(inst))
    assert main(["verify", "--input", str(path)]) == 0
    out = capsys.readouterr().out
    assert "beyond enumeration cap" in out and "dual feasibility: pass" in out


def test_pathlab_csv_exports(tmp_path, e2_file):
    decay = tmp_path / "decay.csv"
    dom = tmp_path / "dom.csv"
    rc = main(
        ["pathlab", "--input", e2_file, "--horizon", "200",
         "--decay-csv", str(decay), "--domination-csv", str(dom)]
    )
    assert rc == 0
    assert decay.read_text().splitlines()[0] == "t,value"
    lines = dom.read_text().splitlines()
    assert lines[0] == "t,value" and len(lines) == 202
