from __future__ import annotations

import json
import subprocess
import sys

import pytest

from psf.cli import main
from psf.derivation import parse_genset
from psf.forest import forest_to_json, isol, path, tkl


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def test_gens_isol_three(capsys):
    code, out, _ = run(capsys, "gens", "--family", "isol", "--n", "3")
    assert code == 0
    gs = parse_genset(out)
    assert len(gs) == 3 and gs.replay_failures() == []


def test_gens_families(capsys, files):
    for argv in (["--family", "path", "--n", "4"], ["--family", "tkl", "--k", "2", "--l", "2"],
                 ["--family", "kpn", "--k", "3", "--n", "2"],
                 ["--family", "generic", "--forest", files("f.json", forest_to_json(path(3)))]):
        code, out, _ = run(capsys, "gens", *argv)
        assert code == 0 and parse_genset(out).replay_failures() == []


def test_gens_missing_parameter(capsys):
    code, out, err = run(capsys, "gens", "--family", "tkl", "--k", "2")
    assert code == 2 and out is None and "--l" in err
    code, _, _ = run(capsys, "gens", "--family", "kpn", "--k", "5", "--n", "2")
    assert code == 2


def test_bounds_on_t23(capsys, files):
    code, out, _ = run(capsys, "bounds", files("t.json", forest_to_json(tkl(2, 3))))
    assert code == 0 and (out["lower"], out["upper"]) == (4, 6)


def test_forest_info(capsys, files):
    code, out, _ = run(capsys, "forest-info", files("p.json", forest_to_json(path(3))))
    assert code == 0 and out["bounds"]["exact"] == 4 and out["stats"]["depth"] == 3


def test_search_min_isol3(capsys, files):
    code, out, _ = run(capsys, "search-min", files("i.json", forest_to_json(isol(3))), "--size", "2", "--box", "5")
    assert code == 0 and (out["result"], out["proof"]) == ("none", "certificates")


def test_verify_and_certify(capsys, files):
    code, out, _ = run(capsys, "gens", "--family", "isol", "--n", "2")
    g = files("gs.json", json.dumps(out))
    code, out, _ = run(capsys, "verify", g)
    assert code == 0 and out["status"] == "PROVEN_GENERATES"
    bad = files("bad.json", json.dumps({"forest": {"parents": [None, None, None]},
                                        "gens": [[1, 2, 3], [9, 6, 1]]}))
    code, out, _ = run(capsys, "verify", bad)
    assert code == 0 and out["status"] == "PROVEN_NOT"
    code, out, _ = run(capsys, "certify", bad)
    assert code == 0 and out["certificate"]["kind"] == "SIGN"
    code, out, _ = run(capsys, "certify", g)
    assert code == 0 and out["certificate"] is None


def test_verify_unknown_is_exit_zero(capsys, files):
    g = files("g.json", json.dumps({"forest": {"parents": [None]}, "gens": [[3], [-5]]}))
    code, out, _ = run(capsys, "verify", g, "--box", "6", "--cap", "3")
    assert code == 0 and out["status"] == "UNKNOWN"


def test_closure_and_membership(capsys, files):
    g = files("g.json", json.dumps({"forest": {"parents": [None]}, "gens": [[1]]}))
    code, out, _ = run(capsys, "closure", g, "--box", "4", "--list")
    assert code == 0 and out["status"] == "saturated"
    assert out["vectors"] == [[1], [2], [3], [4]]
    code, out, _ = run(capsys, "closure", g, "--target", "[3]")
    assert code == 0 and out["status"] == "MEMBER" and out["derivation"] == "(s 3 (g 1))"
    code, _, err = run(capsys, "closure", g, "--target", "[3, 1]")
    assert code == 2


def test_semifield_check(capsys, files):
    s = files("s.json", json.dumps({"kind": "ZP_ZERO_MULT", "p": 5}))
    code, out, _ = run(capsys, "semifield-check", s, "--samples", "200")
    assert code == 0 and out["axioms"]["passed"] and out["ideal_simple"] is True
    s = files("e.json", json.dumps({"kind": "SUBGROUP_EMBEDDING", "forest": {"parents": [None]},
                                    "matrix": [[2]]}))
    code, out, _ = run(capsys, "semifield-check", s)
    assert code == 0 and out["axioms"] == {"passed": True, "checked": 1000}
    s = files("n.json", json.dumps({"kind": "ZP_ZERO_MULT", "p": 4}))
    code, _, err = run(capsys, "semifield-check", s)
    assert code == 2 and "prime" in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["bounds", "/nonexistent/forest.json"],
        ["search-min", "-", "--size", "0"],
        ["verify", "-", "--threads", "0"],
    ],
)
def test_usage_errors(capsys, argv, monkeypatch):
    monkeypatch.setattr(sys, "stdin", __import__("io").StringIO('{"parents": [null]}'))
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_malformed_inputs(capsys, files):
    assert run(capsys, "bounds", files("a.json", "{not json"))[0] == 2
    assert run(capsys, "bounds", files("b.json", '{"parents": [1, 0]}'))[0] == 2
    assert run(capsys, "verify", files("c.json", '{"forest": {"parents": [null]}, "gens": [[1, 2]]}'))[0] == 2


def test_env_defaults_and_override(capsys, files, monkeypatch):
    f = files("i.json", forest_to_json(isol(1)))
    monkeypatch.setenv("PSF_BUDGET_BOX", "1")
    code, out, _ = run(capsys, "search-min", f, "--size", "2")
    assert out["gens"] == [[-1], [1]]
    monkeypatch.setenv("PSF_BUDGET_BOX", "junk")
    assert run(capsys, "search-min", f, "--size", "2")[0] == 2
    code, out, _ = run(capsys, "search-min", f, "--size", "2", "--box", "1")
    assert code == 0 and out["result"] == "found"


def test_out_file_and_determinism(capsys, files, tmp_path):
    g = files("g.json", json.dumps({"forest": {"parents": [None, 0]}, "gens": [[1, -2], [-2, 1], [0, 1]]}))
    target = tmp_path / "o.json"
    code, first, _ = run(capsys, "closure", g, "--box", "5", "--out", str(target))
    assert json.loads(target.read_text()) == first
    _, second, _ = run(capsys, "closure", g, "--box", "5", "--threads", "3")
    assert first == second


def test_results_records(capsys, files, tmp_path, monkeypatch):
    g = files("g.json", json.dumps({"forest": {"parents": [None]}, "gens": [[1], [-1]]}))
    rdir = tmp_path / "runs"
    run(capsys, "verify", g, "--results", str(rdir), "--seed", "7")
    monkeypatch.setenv("PSF_RESULTS", str(rdir))
    run(capsys, "verify", g)
    run(capsys, "bounds", files("f.json", '{"parents": [null]}'))  # not long-running
    recs = sorted(rdir.iterdir())
    assert len(recs) == 2
    rec = json.loads(recs[0].read_text())
    assert set(rec) == {"command", "inputs_digest", "engine_version", "seed", "budget", "output", "wall_time"}
    assert rec["seed"] in (0, 7) and rec["output"]["status"] == "PROVEN_GENERATES"
    # replaying the recorded command reproduces the output
    monkeypatch.delenv("PSF_RESULTS")
    for path in recs:
        rec = json.loads(path.read_text())
        _, again, _ = run(capsys, *rec["command"])
        assert again == rec["output"]


def test_module_entry_point(files):
    f = files("p.json", forest_to_json(path(2)))
    proc = subprocess.run([sys.executable, "-m", "psf", "bounds", f], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["exact"] == 3
