import csv
import json
import os
import subprocess
import sys

import pytest

from dirac_forge import cli
from dirac_forge.report import COLUMNS, RunReport
from dirac_forge.scenarios import (PRESETS, ScenarioError, catalog, load_scenario, parse_scenario_text, preset,
                                   preset_ini)

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIOS = os.path.join(ROOT, "scenarios")


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -------------------------------------------------------------- scenarios

@pytest.mark.parametrize("name", sorted(PRESETS))
def test_shipped_files_match_presets(name):
    path = os.path.join(SCENARIOS, f"{name}.cfg")
    with open(path) as fh:
        assert fh.read() == preset_ini(name)
    assert load_scenario(path) == preset(name)


def test_json_scenario():
    doc = {"scenario": {"name": "j", "suite": "stype", "equation_ref": "x", "epsilon": 1, "grids": [8, 16]},
           "geometry": {"nodes": 16}, "stype": {"masses": [0.5]}}
    sc = parse_scenario_text(json.dumps(doc), "json")
    assert sc.epsilons == (1,) and sc.grids == (8, 16) and sc.model == {"masses": [0.5]}


def test_ini_values_are_typed():
    sc = parse_scenario_text("[scenario]\nsuite = stype\nequation_ref = e\nepsilon = -1\ngrids = 8, 16\n"
                             "[stype]\nmasses = 0.5,\n")
    assert sc.epsilons == (-1,) and sc.grids == (8, 16) and sc.model["masses"] == (0.5,)


@pytest.mark.parametrize("text,match", [
    ("[scenario]\nsuite = nope\nequation_ref = e\n", "unknown suite"),
    ("[scenario]\nsuite = stype\n", "equation_ref"),
    ("[scenario]\nsuite = stype\nequation_ref = e\ngrids = 64, 32\n", "strictly increasing"),
    ("[scenario]\nsuite = stype\nequation_ref = e\ngrids = 4, 8\n", ">= 5"),
    ("[scenario]\nsuite = stype\nequation_ref = e\nepsilon = 2\n", "epsilon"),
    ("[scenario]\nsuite = stype\nequation_ref = e\norder = 3\n", "order"),
    ("[scenario]\nsuite = stype\nequation_ref = e\n[module]\nname = nope\n", "module preset"),
    ("[scenario]\nsuite = stype\nequation_ref = e\nbogus = 1\n", "unknown keys"),
    ("[scenario]\nsuite = stype\nequation_ref = e\n[extra]\n", "unknown sections"),
    ("[geometry]\nnodes = 8\n", "missing"),
    ("not an ini file", "parse error"),
])
def test_scenario_errors(text, match):
    with pytest.raises(ScenarioError, match=match):
        parse_scenario_text(text)


def test_json_parse_error_is_located():
    with pytest.raises(ScenarioError, match="line 2"):
        parse_scenario_text('{\n  "scenario": ,\n}', "json")


def test_catalog_lists_the_model_presets():
    names = {row[0]: row for row in catalog()}
    assert {"geod-sphere", "ym-u1-torus", "higgs-lambda"} <= set(names)
    assert names["geod-sphere"][2] == "curve-energy"
    assert names["ym-u1-torus"][2] == "yang-mills-twisting-field"
    assert names["higgs-lambda"][2] == "higgs-kinetic-term"


def test_list_command(capsys):
    assert cli.main(["list"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    for name in ("geod-sphere", "ym-u1-torus", "higgs-lambda"):
        assert name in out


# ---------------------------------------------------------------- reports

def test_report_records_and_formats(tmp_path):
    rep = RunReport("demo", {"k": 1}, 1)
    rep.add("a", "eq", 1.0, 1.0 + 1e-12, 1e-9, "exact")
    rep.add("b", "eq", 2.0, 1.0, 1e-3, "closed-form")
    rep.add("c", "eq", 3.5, None, 0.0, "measured")
    rep.add("d", "eq", 100.0, 100.5, 1e-2, "cross-check", relative=True)
    assert [r.passed for r in rep.records] == [True, False, True, True]
    assert [r.check_name for r in rep.failures] == ["b"]
    with pytest.raises(ValueError):
        rep.add("e", "eq", 1.0, 1.0, 1.0, "guess")
    paths = rep.write(str(tmp_path), ("csv", "json"))
    assert sorted(os.path.basename(p) for p in paths) == ["demo-report.csv", "demo-report.json"]
    rows = read_csv(tmp_path / "demo-report.csv")
    assert tuple(rows[0]) == COLUMNS
    assert rows[2]["reference"] == "" and rows[1]["pass"] == "false"
    doc = json.loads((tmp_path / "demo-report.json").read_text())
    assert doc["config"] == {"k": 1}
    assert set(doc["environment"]) >= {"kernel_backend", "threads", "numpy"}
    text = (tmp_path / "demo-report.json").read_text()
    for word in ("time", "date", "host"):
        assert word not in text


# ------------------------------------------------------------------ commands

def test_verify_algebra_single_signature(tmp_path, capsys):
    code = cli.main(["verify-algebra", "--sig", "2,0", "--eps", "+1", "--out", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_OK
    rows = read_csv(tmp_path / "verify-algebra-2-0-report.csv")
    assert rows and all(r["pass"] == "true" for r in rows)
    assert all(r["check_name"].endswith("[2,0,+1]") for r in rows)
    assert "PASS" in capsys.readouterr().out


def test_run_stype_scenario_file(tmp_path):
    code = cli.main(["run", os.path.join(SCENARIOS, "stype-torus.cfg"), "--out", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_OK
    rows = read_csv(tmp_path / "stype-torus-report.csv")
    actions = [r for r in rows if r["check_name"].startswith("universal-action")]
    assert len(actions) == 6
    assert all(float(r["abs_error"]) < 1e-6 for r in actions)


def test_convergence_command(tmp_path):
    code = cli.main(["convergence", os.path.join(SCENARIOS, "sphere-scal.cfg"), "--grids", "64,128,256",
                     "--eps", "+1", "--out", str(tmp_path), "--format", "json", "--quiet"])
    assert code == cli.EXIT_OK
    doc = json.loads((tmp_path / "sphere-scal-convergence-report.json").read_text())
    fit = [r for r in doc["checks"] if r["check_name"] == "fitted-order"][0]
    assert abs(fit["value"] - 2) < 0.3
    assert not (tmp_path / "sphere-scal-convergence-report.csv").exists()


def test_failed_checks_exit_one(tmp_path, capsys):
    path = tmp_path / "literal.cfg"
    path.write_text(preset_ini("sphere-scal").replace("[module]", "[operator]\nsign = literal\n\n[module]")
                    .replace("grids = 64, 128, 256", "grids = 32, 64").replace("name = sphere-scal",
                                                                              "name = literal"))
    code = cli.main(["run", str(path), "--eps", "+1", "--out", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_FAILED
    assert "failed trace-potential" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["run", "no-such-file.cfg"],
    ["run", "stype-torus", "--grids", "64,32"],
    ["convergence", "stype-torus"],
    ["convergence", "sphere-scal", "--grids", "64"],
    ["run", "stype-torus", "--threads", "0"],
])
def test_parse_errors_exit_two(argv, tmp_path, capsys):
    assert cli.main(argv + ["--out", str(tmp_path)]) == cli.EXIT_PARSE
    assert capsys.readouterr().err.startswith("error:")


def test_bad_thread_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("DIRAC_FORGE_THREADS", "many")
    assert cli.main(["run", "study-interval", "--out", str(tmp_path)]) == cli.EXIT_PARSE


def test_reports_are_byte_identical_across_processes(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        subprocess.run([sys.executable, "-m", "dirac_forge", "run", "sigma-flat", "--seed", "3", "--threads", "1",
                        "--out", str(out), "--quiet"], check=True, capture_output=True)
        outs.append(out)
    for name in ("sigma-flat-report.csv", "sigma-flat-report.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
