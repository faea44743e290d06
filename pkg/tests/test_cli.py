from __future__ import annotations

import csv
import json
import os
import subprocess
import sys

import jsonschema
import pytest

from gnp_lab import cli

SCHEMA = cli.load_schema("report")


def write(path, doc) -> str:
    path.write_text(json.dumps(doc))
    return str(path)


def run(argv, capsys=None):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr() if capsys is not None else None
    return code, out


def report(path):
    doc = json.loads(path.read_text())
    jsonschema.Draft202012Validator(SCHEMA).validate(doc)
    return doc


@pytest.fixture
def files(tmp_path):
    return {
        "circle": write(tmp_path / "circle.json", {"kind": "star_polar", "center": [0, 0], "G": [1.0] * 32}),
        "farball": write(tmp_path / "farball.json", {"kind": "ball_union", "balls": [{"center": [3, 0], "radius": 1}]}),
        "ballhalf": write(tmp_path / "ballhalf.json", {"kind": "ball", "center": [0, 0], "radius": 0.5}),
        "smallball": write(tmp_path / "smallball.json", {"kind": "ball", "center": [0, 0], "radius": 0.1}),
        "unit": write(tmp_path / "unit.json", {"kind": "ball", "center": [0, 0], "radius": 1.0}),
    }


def test_check_pass_exit_zero(files, tmp_path):
    out = tmp_path / "r.json"
    code, _ = run(["check", "--domain", files["circle"], "--convex", files["ballhalf"], "--mode", "gnp", "--json", out])
    assert code == 0
    doc = report(out)
    assert doc["pass"] is True and doc["command"] == "check"


def test_check_failure_exit_one_with_witness(files, tmp_path):
    out = tmp_path / "r.json"
    code, _ = run(["check", "--domain", files["farball"], "--convex", files["smallball"], "--mode", "sp", "--json", out])
    assert code == 1
    doc = report(out)
    assert doc["pass"] is False and doc["result"]["witness"] is not None


def test_report_to_stdout(files, capsys):
    code, out = run(["check", "--domain", files["circle"], "--convex", files["ballhalf"]], capsys)
    assert code == 0
    jsonschema.Draft202012Validator(SCHEMA).validate(json.loads(out.out))


def test_malformed_json_exit_two(files, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"kind\": \"ball\", ")
    code, out = run(["check", "--domain", files["circle"], "--convex", bad], capsys)
    assert code == 2 and "malformed JSON" in out.err


def test_invalid_field_named(files, tmp_path, capsys):
    bad = write(tmp_path / "neg.json", {"kind": "ball", "center": [0, 0], "radius": -1})
    code, out = run(["check", "--domain", files["circle"], "--convex", bad], capsys)
    assert code == 2 and "radius" in out.err
    bad = write(tmp_path / "dom.json", {"kind": "star_polar", "center": [0, 0]})
    code, out = run(["check", "--domain", bad, "--convex", files["ballhalf"]], capsys)
    assert code == 2 and "G" in out.err


def test_missing_file_exit_two(files, capsys):
    code, out = run(["check", "--domain", "/nonexistent/d.json", "--convex", files["ballhalf"]], capsys)
    assert code == 2 and "not found" in out.err


def test_tolerance_env_override(files, tmp_path, monkeypatch):
    out = tmp_path / "r.json"
    monkeypatch.setenv("GNP_LAB_TOL", "1e-3")
    assert run(["check", "--domain", files["circle"], "--convex", files["ballhalf"], "--json", out])[0] == 0
    assert report(out)["parameters"]["tol"] == pytest.approx(1e-3)
    monkeypatch.setenv("GNP_LAB_TOL", "abc")
    assert run(["check", "--domain", files["circle"], "--convex", files["ballhalf"], "--json", out])[0] == 2


def test_gallery_list_and_build(tmp_path, capsys):
    code, out = run(["gallery", "--list"], capsys)
    assert code == 0 and "cusp_chain" in out.out
    dom = tmp_path / "cusp.json"
    svg = tmp_path / "cusp.svg"
    code, _ = run(["gallery", "cusp_chain", "--param", "n_max=3", "--out", dom, "--svg", svg, "--json", tmp_path / "g.json"])
    assert code == 0
    assert json.loads(dom.read_text())["kind"] == "ball_union"
    assert svg.read_text().startswith("<svg")
    assert run(["gallery", "nope"])[0] == 2
    assert run(["gallery", "two_disk", "--param", "R=-1"])[0] == 2


def test_eps_and_graph_modes(tmp_path, files):
    out = tmp_path / "r.json"
    assert run(["check", "--domain", files["circle"], "--mode", "eps", "--eps", "0.1", "--json", out])[0] == 0
    graph = write(tmp_path / "graph.json", {"kind": "graph", "x": [-1, 0, 1], "phi": [0.5, 0.5, 0.5]})
    assert run(["check", "--domain", graph, "--mode", "graph", "--json", out])[0] == 0
    assert run(["check", "--domain", files["farball"], "--mode", "eps", "--eps", "0.1"])[0] == 2


def test_converge_sequence(tmp_path):
    for n in (2, 4, 8, 16):
        write(tmp_path / f"seq-{n}.json", {"kind": "star_polar", "center": [0, 0], "G": [1 - 1 / n] * 32})
    limit = write(tmp_path / "limit.json", {"kind": "star_polar", "center": [0, 0], "G": [1.0] * 32})
    out, table, fig = tmp_path / "c.json", tmp_path / "c.csv", tmp_path / "c.svg"
    code, _ = run(["converge", "--seq", tmp_path / "seq-*.json", "--limit", limit, "--h", "0.01",
                   "--json", out, "--csv", table, "--svg", fig])
    doc = report(out)
    assert code in (0, 1) and doc["result"]["indices"] == [2, 4, 8, 16]
    rows = list(csv.reader(table.open()))
    assert len(rows) == 5
    assert "<polyline" in fig.read_text()


def test_thickness_command(tmp_path, files):
    dom = write(tmp_path / "d.json", {"kind": "star_polar", "center": [0, 0], "G": [1.3] * 32})
    out = tmp_path / "t.json"
    assert run(["thickness", "--domain", dom, "--convex", files["unit"], "--n", 64, "--json", out])[0] == 0
    stats = report(out)["result"]["stats"]
    assert stats["M"] == pytest.approx(0.3, abs=1e-6)


def test_optimize_command(tmp_path):
    out, table, fig = tmp_path / "o.json", tmp_path / "o.csv", tmp_path / "o.svg"
    code, _ = run(["optimize", "--m", 21, "--lambda-sweep", "0:1:0.5", "--json", out, "--csv", table, "--svg", fig])
    assert code == 0
    rows = list(csv.reader(table.open()))
    assert rows[0][:3] == ["lambda", "P1", "area"] and len(rows) == 4
    assert run(["optimize", "--m", 21, "--bc", "0,10"])[0] == 2


def test_potential_commands(tmp_path, files):
    sup = write(tmp_path / "s.json", {"kind": "ball", "center": [0, 0], "radius": 0.2})
    out, table = tmp_path / "p.json", tmp_path / "p.csv"
    assert run(["potential", "--R", "1.0", "--support", sup, "--eval", "radii:0,0.5", "--json", out, "--csv", table])[0] == 0
    assert len(report(out)["result"]["U"]) == 2
    assert run(["potential", "scan", "--R", "10,20,40", "--support", sup, "--quad", 16, "--json", out])[0] == 0
    assert report(out)["command"] == "potential-scan"
    assert run(["potential", "--R", "0.1", "--support", files["unit"]])[0] == 2


def test_env_disables_numba():
    env = {**os.environ, "GNP_LAB_DISABLE_NUMBA": "1"}
    got = subprocess.run([sys.executable, "-c", "from gnp_lab import _kernels as k; print(k.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert got.stdout.strip() == "numpy"


def test_console_script_version():
    got = subprocess.run([sys.executable, "-m", "gnp_lab.cli", "--version"], capture_output=True, text=True)
    assert got.returncode == 0 and "gnp-lab" in got.stdout
