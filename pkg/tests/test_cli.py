from __future__ import annotations

import json
import shutil

import pytest

from cbac.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, main


def test_validate_clean_fixture(hospital_dir, capsys):
    assert main(["validate", str(hospital_dir)]) == EXIT_OK
    assert "ok" in capsys.readouterr().out


def test_validate_broken_fixture(hospital_dir, tmp_path, capsys):
    target = tmp_path / "broken"
    shutil.copytree(hospital_dir, target)
    (target / "pca.json").write_text('[{"principal": "ghost", "category": "clinician"}]')
    assert main(["validate", str(target)]) == EXIT_VALIDATION
    assert "ghost" in capsys.readouterr().err


def test_eval_table_is_sorted(hospital_dir, capsys):
    assert main(["eval", str(hospital_dir)]) == EXIT_OK
    out = capsys.readouterr().out
    rows = [line.split() for line in out.splitlines()[1:] if line and not line.startswith("#")]
    keys = [(r[0], r[1], r[2], r[3]) for r in rows]
    assert keys == sorted(keys)


def test_eval_critical_state_fact_flag(hospital_dir, capsys):
    assert main(["eval", str(hospital_dir), "--fact", "CRITICAL_STATE=true"]) == EXIT_OK
    out = capsys.readouterr().out
    grant_lines = [line for line in out.splitlines() if "record" in line and "grant" in line]
    assert {line.split()[0] for line in grant_lines} == {"000001", "000002", "000003", "000004", "000006"}


def test_eval_json_output(hospital_dir, capsys):
    assert main(["eval", str(hospital_dir), "--json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert all(set(p) == {"principal", "chain", "permission", "sign"} for p in payload)


def test_eval_bad_fact_is_runtime_failure(hospital_dir, capsys):
    assert main(["eval", str(hospital_dir), "--fact", "NOPE=true"]) == EXIT_RUNTIME
    assert "NOPE" in capsys.readouterr().err


def test_graph_writes_dot_file(hospital_dir, tmp_path, capsys):
    out_file = tmp_path / "out.dot"
    assert main(["graph", str(hospital_dir), "--format", "dot", "-o", str(out_file)]) == EXIT_OK
    text = out_file.read_text()
    assert text.startswith("digraph policy {")
    assert '"P:000001"' in text


def test_graph_node_link_stdout(hospital_dir, capsys):
    assert main(["graph", str(hospital_dir)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"nodes", "links"}


def test_graph_deterministic(hospital_dir, tmp_path):
    first, second = tmp_path / "a.dot", tmp_path / "b.dot"
    main(["graph", str(hospital_dir), "--format", "dot", "-o", str(first)])
    main(["graph", str(hospital_dir), "--format", "dot", "-o", str(second)])
    assert first.read_bytes() == second.read_bytes()


def test_check_small_run(hospital_dir, capsys):
    assert main(["check", str(hospital_dir), "--policies", "5"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "fixture equivalence (permissions): ok" in out
    assert "random-policy suite: ok" in out


def test_missing_policy_dir(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope")]) == EXIT_VALIDATION


@pytest.mark.parametrize("flag,expected", [("true", True), ("false", False)])
def test_fact_flag_boolean_parsing(flag, expected):
    from cbac.cli import _fact_entry

    fact_id, values = _fact_entry(f"CRITICAL_STATE={flag}")
    assert fact_id == "CRITICAL_STATE"
    assert values == [expected]


def test_fact_flag_multiple_values():
    from cbac.cli import _fact_entry

    assert _fact_entry("SEALED_RESOURCE=record,true") == ("SEALED_RESOURCE", ["record", True])
    assert _fact_entry("SET_PCA=000001,read_all") == ("SET_PCA", ["000001", "read_all"])
