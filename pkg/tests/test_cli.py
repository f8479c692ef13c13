import json
import math
import subprocess
import sys

import pytest

from barygap.cli import main
from barygap.verify import SUITES, verify_lemma


def run_cli(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "barygap.cli", *args],
        capture_output=True, text=True, cwd=cwd,
    )


def test_end_to_end_pipeline(tmp_path):
    g = tmp_path / "g.json"
    pts = tmp_path / "pts.json"
    rep = tmp_path / "rep.json"
    assert main(["graph", "gen", "--family", "complete", "--n", "4", "--out", str(g), "--quiet"]) == 0
    assert main(["embed", "--graph", str(g), "--k", "3", "--p", "2", "--q", "2", "--out", str(pts), "--quiet"]) == 0
    cfg = json.loads(pts.read_text())
    assert cfg["regime"] == "Q22" and cfg["d"] == 48
    out = tmp_path / "chub.json"
    assert main(["chub", "--points", str(pts), "--out", str(out), "--quiet"]) == 0
    body = json.loads(out.read_text())
    assert body["results"]["value"] == 10.0
    assert body["results"]["value_exact"] == [10, 1]
    assert main([
        "reduce", "--graph", str(g), "--k", "3", "--p", "2", "--q", "2",
        "--solver", "chub", "--report", str(rep), "--quiet",
    ]) == 0
    report = json.loads(rep.read_text())
    assert report["results"]["agree"] is True
    assert report["version"]
    assert "decide" in report["timings"]


def test_reduce_mot_and_inf_q(tmp_path):
    g = tmp_path / "g.json"
    assert main(["graph", "gen", "--family", "cycle", "--n", "5", "--out", str(g), "--quiet"]) == 0
    assert main([
        "reduce", "--graph", str(g), "--k", "3", "--p", "1", "--q", "inf",
        "--solver", "chub", "--quiet",
    ]) == 0
    assert main([
        "reduce", "--graph", str(g), "--k", "3", "--p", "2", "--q", "2",
        "--solver", "mot", "--quiet",
    ]) == 0


def test_bary_subcommands(tmp_path):
    inst = {
        "p": 2.0,
        "q": 2.0,
        "weights": [0.5, 0.5],
        "measures": [
            {"d": 1, "atoms": [[0.0]], "masses": [1.0]},
            {"d": 1, "atoms": [[2.0]], "masses": [1.0]},
        ],
    }
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(inst))
    out = tmp_path / "solve.json"
    assert main(["bary", "solve", "--instance", str(path), "--method", "mot",
                 "--out", str(out), "--quiet"]) == 0
    assert abs(json.loads(out.read_text())["results"]["value"] - 1.0) < 1e-9
    assert main(["bary", "solve", "--instance", str(path), "--method", "borgwardt",
                 "--out", str(out), "--quiet"]) == 0
    assert abs(json.loads(out.read_text())["results"]["value"] - 2.0) < 1e-9
    upath = tmp_path / "uniform.json"
    inst2 = {
        "p": 2.0,
        "q": 2.0,
        "measures": [
            {"d": 1, "atoms": [[0.1], [0.5]], "masses": [0.25, 0.75]},
            {"d": 1, "atoms": [[-0.4]], "masses": [1.0]},
        ],
    }
    path2 = tmp_path / "inst2.json"
    path2.write_text(json.dumps(inst2))
    assert main(["bary", "uniformize", "--instance", str(path2), "--eps", "0.5",
                 "--out", str(upath), "--quiet"]) == 0
    body = json.loads(upath.read_text())
    sizes = {len(m["masses"]) for m in body["measures"]}
    assert len(sizes) == 1


def test_exit_codes(tmp_path):
    g = tmp_path / "g.json"
    main(["graph", "gen", "--family", "complete", "--n", "4", "--out", str(g), "--quiet"])
    pts = tmp_path / "pts.json"
    main(["embed", "--graph", str(g), "--k", "3", "--p", "2", "--q", "2", "--out", str(pts), "--quiet"])
    # resource cap -> 3
    assert main(["chub", "--points", str(pts), "--cap", "5", "--quiet"]) == 3
    # missing/invalid input -> 2
    assert main(["embed", "--graph", str(tmp_path / "nope.json"), "--k", "2",
                 "--p", "2", "--q", "2", "--out", str(pts), "--quiet"]) == 2
    # usage error -> 2
    assert main(["bogus"]) == 2
    assert main(["graph", "gen", "--family", "unknown", "--out", str(g)]) == 2


def test_verify_cli_and_aliases(tmp_path):
    assert main(["verify", "--lemma", "q1-witness", "--quiet"]) == 0
    assert main(["verify", "--lemma", "3.2", "--budget", "0.2", "--quiet"]) == 0
    assert main(["verify", "--lemma", "helper", "--budget", "0.2", "--quiet"]) == 0
    assert main(["verify", "--lemma", "nonsense", "--quiet"]) == 2
    rep = tmp_path / "verify.json"
    assert main(["verify", "--lemma", "qinf-clique", "--report", str(rep), "--quiet"]) == 0
    body = json.loads(rep.read_text())
    assert body["results"]["passed"] is True


def test_cli_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        main(["graph", "gen", "--family", "random-regular", "--n", "8", "--degree", "3",
              "--seed", "5", "--out", str(out), "--quiet"])
    assert a.read_text() == b.read_text()
    ga = tmp_path / "pa.json"
    gb = tmp_path / "pb.json"
    main(["embed", "--graph", str(a), "--k", "4", "--p", "1", "--q", "1", "--out", str(ga), "--quiet"])
    main(["embed", "--graph", str(a), "--k", "4", "--p", "1", "--q", "1", "--out", str(gb), "--quiet"])
    assert ga.read_text() == gb.read_text()


def test_subprocess_entry_point(tmp_path):
    g = tmp_path / "k4.json"
    res = run_cli(["graph", "gen", "--family", "complete", "--n", "4", "--out", str(g)], tmp_path)
    assert res.returncode == 0, res.stderr
    assert g.exists()


def test_all_verify_suites_pass_at_small_budget():
    for sid in SUITES:
        rep = verify_lemma(sid, seed=0, budget=0.25)
        assert rep["passed"], (sid, [c for c in rep["checks"] if not c["passed"]][:2])
