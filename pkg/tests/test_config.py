from __future__ import annotations

import json
import shutil

import pytest

from cbac.config import (
    CustomFactDecl,
    ParameterDecl,
    field_name_for_label,
    kind_name_for_fact,
    load_policy,
    validate_custom_fact_list,
    validate_custom_fact_values,
)
from cbac.errors import ConfigError, CustomFactError


def test_load_hospital_fixture(hospital):
    cox = hospital.registry.principal("000001")
    assert cox.name == "P. Cox"
    assert cox.title == "MD"
    assert "physician_specialist" in hospital.registry.categories
    assert any(p.principal == "000001" and p.category == "physician_specialist" for p in hospital.pcas)
    assert hospital.registry.by_kind("SITE")  # site.json is optional but present here


def test_load_is_deterministic(hospital_dir):
    first = load_policy(hospital_dir)
    second = load_policy(hospital_dir)
    assert first.registry == second.registry
    assert first.pcas == second.pcas
    assert first.arcas == second.arcas
    assert first.barcas == second.barcas
    assert first.custom_fact_decls == second.custom_fact_decls
    assert first.hierarchy.edges == second.hierarchy.edges


def copy_fixture(hospital_dir, tmp_path):
    target = tmp_path / "policy"
    shutil.copytree(hospital_dir, target)
    return target


def write(directory, name, payload):
    (directory / name).write_text(json.dumps(payload), encoding="utf-8")


def test_unresolved_reference_names_file_and_id(hospital_dir, tmp_path):
    target = copy_fixture(hospital_dir, tmp_path)
    write(target, "arca.json", [{"category": "clinician", "action": "read", "resource": "no_such"}])
    with pytest.raises(ConfigError) as err:
        load_policy(target)
    assert any("arca.json" in issue and "no_such" in issue for issue in err.value.issues)


def test_missing_required_file(hospital_dir, tmp_path):
    target = copy_fixture(hospital_dir, tmp_path)
    (target / "pca.json").unlink()
    with pytest.raises(ConfigError, match="pca.json"):
        load_policy(target)


def test_optional_files_default_empty(hospital_dir, tmp_path):
    target = copy_fixture(hospital_dir, tmp_path)
    (target / "site.json").unlink()
    (target / "hierarchy.json").unlink()
    policy = load_policy(target)
    assert policy.registry.sites == {}
    assert policy.hierarchy.edges == frozenset()


def test_unknown_field_rejected_unless_lenient(hospital_dir, tmp_path):
    target = copy_fixture(hospital_dir, tmp_path)
    write(target, "site.json", [{"id": "hq", "name": "Main Hospital", "colour": "red"}])
    with pytest.raises(ConfigError, match="unknown field"):
        load_policy(target)
    policy = load_policy(target, lenient=True)
    assert "hq" in policy.registry.sites


def test_duplicate_ids_rejected(hospital_dir, tmp_path):
    target = copy_fixture(hospital_dir, tmp_path)
    write(target, "resource.json", [{"id": "record", "name": "A"}, {"id": "record", "name": "B"}])
    with pytest.raises(ConfigError, match="duplicate id"):
        load_policy(target)


def test_hierarchy_cycle_reported(hospital_dir, tmp_path):
    target = copy_fixture(hospital_dir, tmp_path)
    write(target, "hierarchy.json", [
        {"child": "nurse", "parent": "clinician"},
        {"child": "clinician", "parent": "nurse"},
    ])
    with pytest.raises(ConfigError, match="cycle"):
        load_policy(target)


def test_malformed_json_reports_location(hospital_dir, tmp_path):
    target = copy_fixture(hospital_dir, tmp_path)
    (target / "pca.json").write_text("[{", encoding="utf-8")
    with pytest.raises(ConfigError, match="line 1"):
        load_policy(target)


def test_all_errors_collected_not_just_first(hospital_dir, tmp_path):
    target = copy_fixture(hospital_dir, tmp_path)
    write(target, "pca.json", [{"principal": "ghost1", "category": "clinician"}])
    write(target, "arca.json", [{"category": "ghost2", "action": "read", "resource": "record"}])
    with pytest.raises(ConfigError) as err:
        load_policy(target)
    text = str(err.value)
    assert "ghost1" in text and "ghost2" in text


def test_relation_duplicates_collapse(hospital_dir, tmp_path):
    target = copy_fixture(hospital_dir, tmp_path)
    write(target, "pca.json", [
        {"principal": "000001", "category": "physician_specialist"},
        {"principal": "000001", "category": "physician_specialist"},
    ])
    policy = load_policy(target)
    assert len(policy.pcas) == 1


# ---------------------------------------------------------------------------
# Custom fact declarations and values
# ---------------------------------------------------------------------------

def test_field_name_derivation():
    assert field_name_for_label("Critical state") == "criticalState"
    assert field_name_for_label("Responsible physician") == "responsiblePhysician"
    assert field_name_for_label("Locked") == "locked"
    with pytest.raises(CustomFactError):
        field_name_for_label("!!!")


def test_kind_name_derivation():
    assert kind_name_for_fact("BREAK_THE_GLASS") == "BreakTheGlass"
    assert kind_name_for_fact("SET_PCA") == "SetPca"
    assert kind_name_for_fact("CRITICAL_STATE") == "CriticalState"


def test_validate_selection_value(hospital):
    decl = hospital.decl("RESPONSIBLE_PHYSICIAN")
    instance = validate_custom_fact_values(decl, ["000001"], hospital.registry)
    assert instance.fact_id == "RESPONSIBLE_PHYSICIAN"
    assert instance.values == ("000001",)


def test_validate_unknown_option(hospital):
    decl = hospital.decl("RESPONSIBLE_PHYSICIAN")
    with pytest.raises(CustomFactError, match="unknown PRINCIPAL"):
        validate_custom_fact_values(decl, ["zzz"], hospital.registry)


def test_validate_arity(hospital):
    decl = hospital.decl("SEALED_RESOURCE")
    with pytest.raises(CustomFactError, match="expected 2"):
        validate_custom_fact_values(decl, ["record"], hospital.registry)


def test_validate_boolean_type(hospital):
    decl = hospital.decl("SEALED_RESOURCE")
    with pytest.raises(CustomFactError, match="boolean"):
        validate_custom_fact_values(decl, ["record", "maybe"], hospital.registry)


def test_single_fact_supplied_twice(hospital):
    with pytest.raises(CustomFactError, match="at most once"):
        validate_custom_fact_list(hospital, [("CRITICAL_STATE", [True]), ("CRITICAL_STATE", [False])])


def test_decl_invariants_enforced(hospital_dir, tmp_path):
    target = copy_fixture(hospital_dir, tmp_path)
    write(target, "customfacts.json", [{
        "fact": "BAD_RANKS",
        "parameters": [
            {"type": "BOOLEAN", "rank": 0, "label": "A"},
            {"type": "BOOLEAN", "rank": 2, "label": "B"},
        ],
    }])
    with pytest.raises(ConfigError, match="ranks"):
        load_policy(target)
    write(target, "customfacts.json", [{
        "fact": "NO_OPTION",
        "parameters": [{"type": "SELECTION", "rank": 0, "label": "A"}],
    }])
    with pytest.raises(ConfigError, match="optionType"):
        load_policy(target)
    write(target, "customfacts.json", [{"fact": "SET_PCA"}, {"fact": "SET_PCA"}])
    with pytest.raises(ConfigError, match="duplicate fact id"):
        load_policy(target)
    write(target, "customfacts.json", [{"fact": "PCA"}])
    with pytest.raises(ConfigError, match="reserved"):
        load_policy(target)


def test_decl_lookup(hospital):
    assert isinstance(hospital.decl("SET_PCA"), CustomFactDecl)
    with pytest.raises(CustomFactError):
        hospital.decl("NOPE")
    params = hospital.decl("SEALED_RESOURCE").parameters
    assert [p.rank for p in params] == [0, 1]
    assert isinstance(params[0], ParameterDecl)
