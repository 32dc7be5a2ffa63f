from __future__ import annotations

import random

import pytest

from cbac import authz
from cbac.engine import (
    PRIORITY_PERMISSIONS,
    PRIORITY_PROHIBITIONS,
    Session,
    corpus_rules,
    evaluate,
    evaluate_scenario,
    load_corpus,
)
from cbac.errors import BudgetExhaustedError, CbacError, UnknownIdError
from cbac.model import Answer, Arca, Par, Pca, Permission
from cbac.rulelang import parse_rules

from conftest import build_policy


# ---------------------------------------------------------------------------
# Working memory
# ---------------------------------------------------------------------------

def test_insert_dedup_and_delete(chain_policy):
    session = Session(chain_policy, [])
    pca = Pca("p1", "intern")
    assert session.insert_fact(pca) is True
    assert session.insert_fact(Pca("p1", "intern")) is False
    assert session.delete_fact(pca) is True
    assert session.delete_fact(pca) is False
    assert session.insert_fact(pca) is True
    assert pca in session.working_memory()


def test_insert_unresolved_reference(chain_policy):
    session = Session(chain_policy, [])
    with pytest.raises(UnknownIdError):
        session.insert_fact(Pca("p1", "no_such_category"))


def test_budget_must_be_positive(chain_policy):
    with pytest.raises(CbacError):
        Session(chain_policy, [], budget=0)


# ---------------------------------------------------------------------------
# Matching, ordering, refraction
# ---------------------------------------------------------------------------

def test_match_single_activation(chain_policy):
    rules = parse_rules('rule "r" when $p : Pca() then end')
    session = Session(chain_policy, rules)
    session.insert_fact(Pca("p1", "intern"))
    activations = session.match_activations()
    assert len(activations) == 1
    assert activations[0].rule.name == "r"
    assert activations[0].bindings["$p"] == Pca("p1", "intern")


def test_salience_orders_activations(chain_policy):
    rules = parse_rules(
        'rule "low" salience -100 when $p : Pca() then end\n'
        'rule "high" when $p : Pca() then end'
    )
    session = Session(chain_policy, rules)
    session.insert_fact(Pca("p1", "intern"))
    names = [a.rule.name for a in session.match_activations()]
    assert names == ["high", "low"]


def test_recency_orders_within_rule(chain_policy):
    rules = parse_rules('rule "r" when $p : Pca() then end')
    session = Session(chain_policy, rules)
    session.insert_fact(Pca("p1", "intern"))
    session.insert_fact(Pca("p1", "resident"))
    matched = [a.bindings["$p"].category for a in session.match_activations()]
    assert matched == ["resident", "intern"]  # most recent first


def test_refraction_excludes_fired_tuples(chain_policy):
    rules = parse_rules('rule "r" when $p : Pca() then end')
    session = Session(chain_policy, rules)
    session.insert_fact(Pca("p1", "intern"))
    report = session.fire_until_quiescent()
    assert report.fired_count == 1
    assert session.match_activations() == []
    # hand-simulated second step: a new fact produces exactly one new activation
    session.insert_fact(Pca("p1", "resident"))
    activations = session.match_activations()
    assert [a.bindings["$p"].category for a in activations] == ["resident"]


def test_delete_and_reinsert_retriggers(chain_policy):
    rules = parse_rules('rule "r" when $p : Pca() then end')
    session = Session(chain_policy, rules)
    pca = Pca("p1", "intern")
    session.insert_fact(pca)
    assert session.fire_until_quiescent().fired_count == 1
    session.delete_fact(pca)
    session.insert_fact(pca)
    assert [a.facts for a in session.match_activations()] == [(pca,)]


def test_empty_lhs_fires_once(chain_policy):
    rules = parse_rules('rule "always" when then end')
    session = Session(chain_policy, rules)
    assert session.fire_until_quiescent().fired_count == 1
    assert session.match_activations() == []


def test_negated_pattern_blocks_match(chain_policy):
    rules = parse_rules(
        'rule "r" when $p : Pca() not Arca(category.id == "intern") then end')
    session = Session(chain_policy, rules)
    session.insert_fact(Pca("p1", "specialist"))
    assert len(session.match_activations()) == 1  # no Arca in memory yet
    session.insert_fact(Arca("intern", Permission("read", "record")))
    assert session.match_activations() == []


def test_set_pca_fact_yields_one_activation(hospital):
    from cbac.config import validate_custom_fact_values

    rules = [r for r in corpus_rules() if r.name == "Rule add customs Pcas"]
    session = Session(hospital, rules)
    instance = validate_custom_fact_values(hospital.decl("SET_PCA"), ["000001", "clinician"], hospital.registry)
    session.insert_fact(instance)
    activations = session.match_activations()
    assert len(activations) == 1
    assert activations[0].rule.name == "Rule add customs Pcas"
    session.fire_until_quiescent()
    assert Pca("000001", "clinician") in session.working_memory()


def test_globals_contract_sink_does_not_activate(chain_policy):
    session = Session(chain_policy, corpus_rules())
    session.seed()
    before = session.match_activations()
    session.pars.add(Par("p1", ("intern",), Permission("read", "record")))
    after = session.match_activations()
    assert len(before) == len(after)


# ---------------------------------------------------------------------------
# Firing to quiescence
# ---------------------------------------------------------------------------

def test_chain_fixture_produces_inherited_grant(chain_policy):
    result = evaluate(chain_policy)
    assert result.pars == (
        Par("p1", ("specialist", "resident", "intern"), Permission("read", "record"), Answer.GRANT),
    )


def test_empty_memory_quiesces_immediately():
    policy = build_policy(actions=("read",), resources=("r",))
    session = Session(policy, corpus_rules())
    report = session.fire_until_quiescent()
    assert report.fired_count == 0
    assert len(session.pars) == 0


def test_conflict_barca_removed_before_pars(conflict_policy):
    result = evaluate(conflict_policy, priority=PRIORITY_PERMISSIONS)
    assert {(p.sign, p.permission.action) for p in result.pars} == {(Answer.GRANT, "read")}
    assert not result.relations.barcas
    result = evaluate(conflict_policy, priority=PRIORITY_PROHIBITIONS)
    assert {p.sign for p in result.pars} == {Answer.DENY}
    assert not result.relations.arcas


def test_budget_exhaustion_reports_trace(chain_policy):
    # delete + reinsert flips the fact's epoch forever: never quiesces
    rules = parse_rules(
        'rule "spin" when $p : Pca(category.id == "intern") then '
        'delete($p) insert(new Pca("p1", "intern")) end')
    session = Session(chain_policy, rules, budget=50)
    session.insert_fact(Pca("p1", "intern"))
    with pytest.raises(BudgetExhaustedError) as err:
        session.fire_until_quiescent()
    assert err.value.budget == 50
    assert err.value.recent_rules[-1] == "spin"
    assert len(err.value.recent_rules) == 10


def test_update_desugar_executes(chain_policy):
    rules = parse_rules(
        'rule "move" when $p : Pca(category.id == "intern") then '
        'update($p, new Pca("p1", "resident")) end')
    session = Session(chain_policy, rules)
    session.insert_fact(Pca("p1", "intern"))
    session.fire_until_quiescent()
    assert session.working_memory() == (Pca("p1", "resident"),)


def test_unknown_custom_kind_never_matches(chain_policy):
    # corpus rules mention custom kinds the chain fixture never declares
    result = evaluate(chain_policy)
    assert result.report.fired_count == 1


def test_duplicate_rule_names_rejected_at_session(chain_policy):
    rules = parse_rules('rule "x" when then end') + parse_rules('rule "x" when then end')
    with pytest.raises(CbacError, match="duplicate rule name"):
        Session(chain_policy, rules)


# ---------------------------------------------------------------------------
# evaluate() and scenarios
# ---------------------------------------------------------------------------

def test_evaluate_matches_oracle_on_hospital(hospital):
    for priority in (PRIORITY_PERMISSIONS, PRIORITY_PROHIBITIONS):
        result = evaluate(hospital, priority=priority)
        oracle = authz.axiom_par(authz.remove_conflicts(result.relations, priority))
        assert authz.project(result.pars) == oracle


def test_par_chain_endpoints_consistent(hospital):
    result = evaluate(hospital)
    for par in result.pars:
        assert authz.chain_endpoints_consistent(par, result.relations), par


def test_critical_state_scenario(hospital):
    result = evaluate_scenario(hospital, [("CRITICAL_STATE", [True])])
    clinicians = {"000001", "000002", "000003", "000004", "000006"}
    readers = {p.principal for p in result.pars
               if p.permission == Permission("read", "record") and p.sign is Answer.GRANT}
    assert readers == clinicians


def test_critical_state_false_is_noop(hospital):
    assert evaluate_scenario(hospital, [("CRITICAL_STATE", [False])]).pars == evaluate(hospital).pars


def test_sealed_locked_removes_resource(hospital):
    result = evaluate_scenario(hospital, [("SEALED_RESOURCE", ["record", True])])
    assert all(p.permission.resource != "record" for p in result.pars)


def test_break_the_glass_exact_principals(hospital):
    result = evaluate_scenario(hospital, [
        ("SEALED_RESOURCE", ["record", False]),
        ("BREAK_THE_GLASS", ["000001"]),
        ("BREAK_THE_GLASS", ["000004"]),
    ])
    record_readers = {p.principal for p in result.pars if p.permission.resource == "record"}
    # 000001 broke the glass from a category holding an Arca on the record;
    # 000004 broke the glass but held no such assignment; 000006 never broke it
    assert record_readers == {"000001"}
    assert {p.chain for p in result.pars if p.principal == "000001"
            and p.permission.resource == "record"} == {("sealed_resource",)}


def test_break_the_glass_covers_every_breaker(hospital):
    result = evaluate_scenario(hospital, [
        ("SEALED_RESOURCE", ["record", False]),
        ("BREAK_THE_GLASS", ["000001"]),
        ("BREAK_THE_GLASS", ["000006"]),
    ])
    record_readers = {p.principal for p in result.pars if p.permission.resource == "record"}
    assert record_readers == {"000001", "000006"}


def test_single_fact_rejected_twice(hospital):
    with pytest.raises(CbacError, match="single"):
        evaluate_scenario(hospital, [("CRITICAL_STATE", [True]), ("CRITICAL_STATE", [True])])


def test_set_pca_rule(hospital):
    result = evaluate_scenario(hospital, [("SET_PCA", ["000005", "read_all"])])
    added = {p for p in result.pars if p.principal == "000005" and p.permission.resource == "record"}
    assert added == {Par("000005", ("read_all",), Permission("read", "record"), Answer.GRANT)}


def test_responsible_physician_rule(hospital):
    result = evaluate_scenario(hospital, [("RESPONSIBLE_PHYSICIAN", ["000002"])])
    grants = {(p.permission.action, p.permission.resource)
              for p in result.pars if p.principal == "000002" and p.chain == ("responsible_physician",)}
    assert grants == {("read", "record"), ("update", "record")}


# ---------------------------------------------------------------------------
# Confluence: declaration order of equal-salience custom rules is immaterial
# ---------------------------------------------------------------------------

SCENARIOS = (
    [],
    [("CRITICAL_STATE", [True])],
    [("SEALED_RESOURCE", ["record", False]), ("BREAK_THE_GLASS", ["000001"])],
    [("SEALED_RESOURCE", ["record", True]), ("CRITICAL_STATE", [True])],
    [("RESPONSIBLE_PHYSICIAN", ["000002"]), ("SET_PCA", ["000005", "read_all"])],
)


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_scenario_oracle_equivalence(hospital, scenario):
    from cbac.config import validate_custom_fact_list

    instances = validate_custom_fact_list(hospital, scenario)
    for priority in (PRIORITY_PERMISSIONS, PRIORITY_PROHIBITIONS):
        assert authz.check_equivalence(hospital, instances, priority).ok, (scenario, priority)


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_scenario_chain_endpoints_consistent(hospital, scenario):
    result = evaluate_scenario(hospital, scenario)
    for par in result.pars:
        assert authz.chain_endpoints_consistent(par, result.relations), par


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_custom_rule_order_confluence(hospital, scenario):
    from cbac.config import validate_custom_fact_list

    instances = validate_custom_fact_list(hospital, scenario)
    baseline = None
    rng = random.Random(7)
    for _ in range(4):
        rules = corpus_rules(PRIORITY_PERMISSIONS)
        zero = [r for r in rules if r.salience == 0]
        rest = [r for r in rules if r.salience != 0]
        rng.shuffle(zero)
        result = evaluate(hospital, tuple(instances), rules=zero + rest)
        pars = frozenset(result.pars)
        if baseline is None:
            baseline = pars
        assert pars == baseline


def test_corpus_has_expected_files():
    names = set(load_corpus())
    assert names == {
        "add-custom-pcas", "responsible-physician", "critical-state-read-all",
        "critical-state-remove-read-prohibitions", "sealed-and-locked",
        "sealed-break-the-glass", "conflicts-remove-barca", "conflicts-remove-arca",
        "pars-permissions", "pars-prohibitions",
    }
    assert len(corpus_rules(PRIORITY_PERMISSIONS)) == len(corpus_rules(PRIORITY_PROHIBITIONS))
