"""Rule-engine-free authorization decisions, by direct set enumeration.

This module answers the same questions as the rule session but computes
them the dumb way: enumerate the assignment relations, close them over the
category order, and read the grant/deny sets off. It is both the single
request decision procedure and the independent oracle the engine is
checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import PolicyConfig
from .hierarchy import CategoryHierarchy
from .model import Answer, Arca, Barca, CustomFactInstance, EntityRegistry, Par, Pca

#: (principal id, action id, resource id, sign)
Triple = tuple[str, str, str, Answer]


@dataclass(frozen=True)
class BaseRelations:
    pcas: frozenset[Pca]
    arcas: frozenset[Arca]
    barcas: frozenset[Barca]
    hierarchy: CategoryHierarchy


def axiom_par(base: BaseRelations) -> frozenset[Triple]:
    """All authorizations and prohibitions the relations induce.

    A principal in category c is granted (a, r) when some category at or
    above c holds an Arca for it, and denied when some category at or
    below c holds a Barca for it: prohibitions propagate in the inverse
    direction of permissions.
    """
    contains = base.hierarchy.contains_or_equals
    found: set[Triple] = set()
    for pca in base.pcas:
        for arca in base.arcas:
            if contains(arca.category, pca.category):
                found.add((pca.principal, arca.permission.action, arca.permission.resource, Answer.GRANT))
        for barca in base.barcas:
            if contains(pca.category, barca.category):
                found.add((pca.principal, barca.permission.action, barca.permission.resource, Answer.DENY))
    return frozenset(found)


def remove_conflicts(base: BaseRelations, priority: str) -> BaseRelations:
    """Drop the relation the priority sacrifices wherever an Arca and a
    Barca collide on the same permission with the Arca's category at or
    above the Barca's. Returns a derived copy; inputs are never touched."""
    contains = base.hierarchy.contains_or_equals

    def conflicting(arca: Arca, barca: Barca) -> bool:
        return arca.permission == barca.permission and contains(arca.category, barca.category)

    if priority == "permissions":
        barcas = frozenset(b for b in base.barcas if not any(conflicting(a, b) for a in base.arcas))
        return BaseRelations(base.pcas, base.arcas, barcas, base.hierarchy)
    if priority == "prohibitions":
        arcas = frozenset(a for a in base.arcas if not any(conflicting(a, b) for b in base.barcas))
        return BaseRelations(base.pcas, arcas, base.barcas, base.hierarchy)
    raise ValueError(f"unknown priority {priority!r}")


def decide(base: BaseRelations, principal: str, action: str, resource: str,
           priority: str = "permissions", registry: EntityRegistry | None = None) -> Answer:
    """grant / deny / undetermined for one access request.

    With a registry supplied the request ids are checked first and unknown
    ones rejected; without one, unknown ids simply never match and the
    answer is undetermined.
    """
    if registry is not None:
        registry.principal(principal)
        registry.action(action)
        registry.resource(resource)
    resolved = axiom_par(remove_conflicts(base, priority))
    if (principal, action, resource, Answer.GRANT) in resolved:
        return Answer.GRANT
    if (principal, action, resource, Answer.DENY) in resolved:
        return Answer.DENY
    return Answer.UNDETERMINED


@dataclass(frozen=True)
class EquivalenceReport:
    ok: bool
    engine_only: tuple[Triple, ...] = ()
    oracle_only: tuple[Triple, ...] = ()

    def describe(self) -> str:
        if self.ok:
            return "ok"
        lines = ["engine and oracle disagree:"]
        lines.extend(f"  engine only: {t[0]}/{t[1]}/{t[2]} {t[3].value}" for t in self.engine_only)
        lines.extend(f"  oracle only: {t[0]}/{t[1]}/{t[2]} {t[3].value}" for t in self.oracle_only)
        return "\n".join(lines)


def project(pars) -> frozenset[Triple]:
    return frozenset((p.principal, p.permission.action, p.permission.resource, p.sign) for p in pars)


def compare_with_oracle(pars, relations: BaseRelations, priority: str) -> EquivalenceReport:
    """Compare an engine ParSet against the oracle replayed over the
    quiesced relations. Conflict removal is applied on the oracle side; on
    a correctly quiesced snapshot it is a no-op, so any difference points
    at the engine run, not the replay."""
    engine_side = project(pars)
    oracle_side = axiom_par(remove_conflicts(relations, priority))
    if engine_side == oracle_side:
        return EquivalenceReport(True)
    return EquivalenceReport(
        False,
        tuple(sorted(engine_side - oracle_side, key=lambda t: (t[0], t[1], t[2], t[3].value))),
        tuple(sorted(oracle_side - engine_side, key=lambda t: (t[0], t[1], t[2], t[3].value))),
    )


def check_equivalence(policy: PolicyConfig,
                      custom_facts: list[CustomFactInstance] | tuple[CustomFactInstance, ...] = (),
                      priority: str = "permissions",
                      budget: int = 100_000) -> EquivalenceReport:
    """Run the engine, then replay the axiom over the quiesced relations."""
    from . import engine  # runtime import: engine imports this module's types

    result = engine.evaluate(policy, tuple(custom_facts), priority, budget)
    return compare_with_oracle(result.pars, result.relations, priority)


def chain_endpoints_consistent(par: Par, relations: BaseRelations) -> bool:
    """A Par's chain must start at one of the principal's categories and end
    at a category actually holding the matching Arca/Barca."""
    if Pca(par.principal, par.chain[0]) not in relations.pcas:
        return False
    if par.sign is Answer.GRANT:
        return Arca(par.chain[-1], par.permission) in relations.arcas
    return Barca(par.chain[-1], par.permission) in relations.barcas
