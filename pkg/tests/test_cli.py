"""Command-line harness: report formats, determinism, and error handling."""

import csv
import io
import json
import subprocess
import sys

import pytest

BASE_ENV = {"PATH": "/usr/bin:/bin", "HOME": "/tmp"}


def run_cli(*args, env=None, check=True):
    proc = subprocess.run(
        [sys.executable, "-m", "bgame.cli", *args],
        capture_output=True,
        text=True,
        env={**BASE_ENV, **(env or {})},
    )
    if check and proc.returncode != 0:
        raise AssertionError(f"exit {proc.returncode}: {proc.stderr}")
    return proc


def parse_csv(text):
    header = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition("=")
            header[key] = val
        else:
            body.append(line)
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    return header, rows


def test_catalog_lists_builtins():
    out = run_cli("catalog")
    header, rows = parse_csv(out.stdout)
    assert header["command"] == "catalog"
    assert [r["name"] for r in rows] == [
        "scada_external", "scada_internal", "der1", "ecommerce", "voip", "ieee300",
    ]


def test_validate_clean_builtin():
    out = run_cli("validate", "--graph", "voip")
    _, rows = parse_csv(out.stdout)
    assert rows[0]["status"] == "valid"
    assert rows[0]["min_cut"] == "2"


def test_validate_flags_broken_file(tmp_path):
    bad = {"nodes": ["s", "t"], "edges": [{"src": "s", "dst": "t", "p0": 1.7, "s": 1.0}],
           "sources": ["s"], "critical_assets": {"t": 1.0}}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    out = run_cli("validate", "--graph", str(path), check=False)
    assert out.returncode == 2
    _, rows = parse_csv(out.stdout)
    assert rows[0]["status"] == "invalid"
    assert any("p0-range" in r["detail"] for r in rows)


def test_unknown_graph_is_a_machine_readable_error():
    out = run_cli("solve", "--graph", "atlantis", check=False)
    assert out.returncode == 2
    err = json.loads(out.stderr)
    assert set(err) == {"error", "message"}


def test_solve_rows_spend_the_budget():
    out = run_cli("solve", "--graph", "diamond", "--alpha", "0.5", "--budget", "9")
    _, rows = parse_csv(out.stdout)
    assert len(rows) == 6
    assert sum(float(r["investment"]) for r in rows) == pytest.approx(9.0, abs=1e-6)


def test_equilibrium_header_carries_totals():
    out = run_cli("equilibrium", "--graph", "shared_edge_pair")
    header, rows = parse_csv(out.stdout)
    assert header["converged"] == "True"
    assert float(header["total_true_loss"]) > 0
    assert {r["defender"] for r in rows} == {"d1", "d2"}


def test_gains_json_structure():
    out = run_cli("gains", "--graph", "scada_external", "--format", "json")
    doc = json.loads(out.stdout)
    assert doc["header"]["command"] == "gains"
    assert len(doc["rows"]) == 5
    assert doc["header"]["avg_gain"] >= 1.0


def test_poa_single_row():
    out = run_cli("poa", "--graph", "split_chain_pair", "--format", "json")
    doc = json.loads(out.stdout)
    (row,) = doc["rows"]
    assert row["poa"] == pytest.approx(1.0, abs=1e-3)


def test_learn_emits_one_row_per_round():
    out = run_cli("learn", "--graph", "diamond", "--mode", "rl", "--rounds", "6",
                  "--seed", "3", "--attacker", "replay")
    header, rows = parse_csv(out.stdout)
    assert header["mode"] == "rl"
    assert len(rows) == 6
    assert [r["round"] for r in rows] == [str(i) for i in range(6)]
    assert {"defender", "alpha", "loss_true", "loss_perceived", "R",
            "p_rational", "realized"} <= set(rows[0])


def test_reports_are_byte_identical_across_runs(tmp_path):
    scenario = {"version": 1, "graph": "diamond", "alphas": [0.4], "budget": 5,
                "seed": 7, "rounds": 5, "attacker": "random", "mode": "hybrid"}
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario))
    runs = [run_cli("learn", "--scenario", str(path), "--format", "json").stdout
            for _ in range(2)]
    assert runs[0] == runs[1]
    doc = json.loads(runs[0])
    assert doc["header"]["seed"] == 7


def test_cli_flags_override_scenario(tmp_path):
    scenario = {"version": 1, "graph": "diamond", "rounds": 50, "seed": 1}
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario))
    out = run_cli("learn", "--scenario", str(path), "--rounds", "2",
                  "--mode", "paths", "--format", "json")
    doc = json.loads(out.stdout)
    assert doc["header"]["rounds"] == 2


def test_unsupported_scenario_version(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"version": 99, "graph": "diamond"}))
    out = run_cli("validate", "--scenario", str(path), check=False)
    assert out.returncode == 2
    assert "version" in json.loads(out.stderr)["message"]


def test_out_flag_writes_file(tmp_path):
    dest = tmp_path / "report.csv"
    out = run_cli("poa", "--graph", "split_chain_pair", "--out", str(dest))
    assert out.stdout == ""
    header, rows = parse_csv(dest.read_text())
    assert header["command"] == "poa"
    assert len(rows) == 1


def test_sweep_budget_axis():
    out = run_cli("sweep", "--graph", "scada_external", "--axis", "budget",
                  "--values", "10,40", "--alpha", "1", "--format", "json")
    doc = json.loads(out.stdout)
    losses = [r["loss@1"] for r in doc["rows"]]
    assert losses[0] > losses[1]


def test_sweep_axis_mismatch_errors():
    out = run_cli("sweep", "--graph", "voip", "--axis", "rtu_count", check=False)
    assert out.returncode == 2
    assert "rtu_count" in json.loads(out.stderr)["message"]


def test_sweep_requires_values_for_budget():
    out = run_cli("sweep", "--graph", "voip", "--axis", "budget", check=False)
    assert out.returncode == 2


def test_thread_cap_is_validated():
    ok = run_cli("sweep", "--graph", "diamond", "--axis", "sensitivity_ratio",
                 "--values", "1,2", "--alpha", "0.5", env={"BGAME_THREADS": "1"})
    doc_header, rows = parse_csv(ok.stdout)
    assert len(rows) == 2
    bad = run_cli("sweep", "--graph", "diamond", "--axis", "sensitivity_ratio",
                  "--values", "1", env={"BGAME_THREADS": "zero"}, check=False)
    assert bad.returncode == 2


def test_file_graph_gets_a_synthesized_defender(tmp_path):
    from bgame import build_case_study, save_graph

    path = tmp_path / "voip.json"
    save_graph(build_case_study("voip").graph, str(path))
    out = run_cli("solve", "--graph", str(path), "--budget", "8", "--alpha", "1",
                  "--format", "json")
    doc = json.loads(out.stdout)
    assert {r["defender"] for r in doc["rows"]} == {"d1"}
    spent = sum(r["investment"] for r in doc["rows"])
    assert spent == pytest.approx(8.0, abs=1e-6)
