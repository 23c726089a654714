import json
import subprocess
import sys

import pytest

from tilegrowth.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_OK, EXIT_USAGE, expected_tiles, main


def run(*argv):
    return main([str(a) for a in argv])


def test_build_counts(capsys):
    assert run("build", "--gamma", "3,6,3", "--n", 2) == EXIT_OK
    out = capsys.readouterr().out
    assert "tiles  144" in out and "edges 315" in out
    assert run("build", "--bk", "4,16", "--n", 1) == EXIT_OK
    assert "edges 168" in capsys.readouterr().out
    assert run("build", "--gamma", "3,6,3", "--n", 0) == EXIT_OK
    assert "tiles  1" in capsys.readouterr().out


def test_build_writes_deterministic_json(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("build", "--bk", "4,16", "--n", 2, "--graph", "cylinder", "--out", d) == EXIT_OK
    for name in ("tiling.json", "graph.json"):
        x, y = (a / name).read_text(), (b / name).read_text()
        # the only difference is the --out value echoed in the config
        assert x.replace(str(a), "") == y.replace(str(b), "")
    g = json.loads((a / "graph.json").read_text())
    t = json.loads((a / "tiling.json").read_text())
    assert g["kind"] == "cylinder" and g["n"] == len(t["tiles"]) == 4096
    assert t["config"]["bk"] == [4, 16] and t["config"]["seed"] == 0


def test_build_csv(tmp_path):
    assert run("build", "--gamma", "3,6,3", "--format", "csv", "--graph", "linear", "--out", tmp_path) == 0
    lines = (tmp_path / "tiling.csv").read_text().splitlines()
    assert lines[0] == "id,x,y,l1,l2" and len(lines) == 13
    g = (tmp_path / "graph.csv").read_text().splitlines()
    assert g[0] == "u,v,weight" and g[1:] == ["0,1,6.0", "1,2,6.0"]
    assert json.loads((tmp_path / "config.json").read_text())["format"] == "csv"


@pytest.mark.parametrize("argv", [
    ["build", "--bk", "3,16"],
    ["build", "--bk", "4,16,2"],
    ["build", "--gamma", "3,0,3"],
    ["build", "--degree", "1.5", "--n", "2"],
    ["build", "--gamma", "3,6,3", "--n", "-1"],
    ["build", "--gamma", "x"],
    ["build", "--gamma", "3,6,3", "--bk", "4,16"],
    ["verify", "--gamma", "3,6,3", "--replicas", "1"],
    ["verify", "--gamma", "3,6,3", "--time-grid", "4,2"],
    ["verify", "--gamma", "3,6,3", "--radius-grid", "4"],
    ["frobnicate"],
    ["build"],
])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_budget_refusals(tmp_path):
    assert run("build", "--bk", "4,16", "--n", 6) == EXIT_BUDGET
    assert run("build", "--gamma", "3,6,3", "--n", 2, "--budget", "1e-9") == EXIT_BUDGET
    assert run("render", "--gamma", "3,6,3", "--n", 5) == EXIT_BUDGET
    assert expected_tiles({"gamma": [3, 6, 3], "n": 3}) == 1728
    assert expected_tiles({"gamma": [3, 6, 3], "n": 2, "tower": True}) == 12 + 144


def test_render(tmp_path):
    out = tmp_path / "h.svg"
    assert run("render", "--gamma", "3,6,3", "--out", out) == EXIT_OK
    assert out.read_text().count("<rect ") == 12
    assert run("render", "--gamma", "3,6,3", "--n", 0, "--out", out) == EXIT_OK
    assert out.read_text().count("<rect ") == 1
    assert run("render", "--gamma", "3,6,3", "--n", 3, "--tower", "--out", out) == EXIT_OK
    assert out.read_text().count("<rect ") == 12 + 144 + 1728
    d = tmp_path / "b"
    run("build", "--gamma", "3,6,3", "--graph", "none", "--out", d)
    assert run("render", "--input", d / "tiling.json", "--out", out) == EXIT_OK
    assert out.read_text().count("<rect ") == 12


def test_verify_quick_passes_and_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("verify", "--bk", "4,16", "--n", 2, "--profile", "quick", "--out", a) == EXIT_OK
    assert run("verify", "--bk", "4,16", "--n", 2, "--profile", "quick", "--out", b) == EXIT_OK
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert ra["checks"] == rb["checks"]
    assert ra["passed"] and not ra["hard_failures"]
    assert {c["name"] for c in ra["checks"]} >= {"diameter_bracket", "rho_H_recursion",
                                                 "walk_projection_inequality", "level_coupling"}


def test_verify_rejects_corrupted_graph(tmp_path):
    d = tmp_path / "g"
    assert run("build", "--bk", "4,16", "--n", 2, "--out", d) == EXIT_OK
    good = d / "graph.json"
    assert run("verify", "--bk", "4,16", "--n", 2, "--profile", "quick", "--graph", good,
               "--out", tmp_path / "ok.json") == EXIT_OK
    g = json.loads(good.read_text())
    g["edges"].pop(7)
    g["tags"].pop(7)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(g))
    rep_path = tmp_path / "rep.json"
    assert run("verify", "--bk", "4,16", "--n", 2, "--profile", "quick", "--graph", bad,
               "--out", rep_path) == EXIT_FAIL
    rep = json.loads(rep_path.read_text())
    assert rep["hard_failures"] == ["input_graph_matches_construction"]


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "tilegrowth", "--version"], capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.strip()
