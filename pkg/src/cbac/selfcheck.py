"""Randomized cross-checks of the rule engine against the set oracle.

Generates small random policies (random category DAG, random assignment
relations), evaluates each under both conflict priorities and verifies
that the engine's results match the axiom replay exactly, that firing
always quiesces inside the budget, and that the exported graph is
well-typed with a realizing path for every grant.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from . import authz, engine, graph
from .config import PolicyConfig
from .errors import BudgetExhaustedError
from .hierarchy import CategoryHierarchy
from .model import (
    Action,
    Answer,
    Arca,
    Barca,
    Category,
    EntityRegistry,
    Pca,
    Permission,
    Principal,
    Resource,
)

MAX_PRINCIPALS = 10
MAX_CATEGORIES = 8
MAX_ACTIONS = 5
MAX_RESOURCES = 5
MAX_DENSITY = 0.4


def random_policy(rng: random.Random) -> PolicyConfig:
    """One random policy within the suite's size envelope."""
    n_principals = rng.randint(1, MAX_PRINCIPALS)
    n_categories = rng.randint(1, MAX_CATEGORIES)
    n_actions = rng.randint(1, MAX_ACTIONS)
    n_resources = rng.randint(1, MAX_RESOURCES)
    density = rng.uniform(0.0, MAX_DENSITY)

    principals = {f"p{i}": Principal(f"p{i}", f"Principal {i}") for i in range(n_principals)}
    categories = {f"c{i}": Category(f"c{i}", f"Category {i}") for i in range(n_categories)}
    actions = {f"a{i}": Action(f"a{i}", f"Action {i}") for i in range(n_actions)}
    resources = {f"r{i}": Resource(f"r{i}", f"Resource {i}") for i in range(n_resources)}
    registry = EntityRegistry(principals, categories, actions, resources, {})

    # edges only from higher to lower index keep the graph acyclic
    edges = {
        (f"c{j}", f"c{i}")
        for i in range(n_categories)
        for j in range(i + 1, n_categories)
        if rng.random() < density
    }
    hierarchy = CategoryHierarchy.build(set(categories), edges)

    pcas = frozenset(
        Pca(p, c) for p in principals for c in categories if rng.random() < density
    )
    perms = [Permission(a, r) for a in actions for r in resources]
    arcas = frozenset(Arca(c, perm) for c in categories for perm in perms if rng.random() < density)
    barcas = frozenset(Barca(c, perm) for c in categories for perm in perms if rng.random() < density)
    return PolicyConfig(registry, hierarchy, pcas, arcas, barcas, ())


@dataclass
class SuiteReport:
    policies: int = 0
    evaluations: int = 0
    budget_exhaustions: int = 0
    mismatches: list[str] = field(default_factory=list)
    graph_violations: list[str] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not (self.budget_exhaustions or self.mismatches or self.graph_violations)

    def describe(self) -> str:
        status = "ok" if self.ok else "FAILED"
        lines = [
            f"random-policy suite: {status}",
            f"  policies evaluated: {self.policies} ({self.evaluations} engine runs)",
            f"  budget exhaustions: {self.budget_exhaustions}",
            f"  oracle mismatches:  {len(self.mismatches)}",
            f"  graph violations:   {len(self.graph_violations)}",
            f"  elapsed:            {self.elapsed_seconds:.1f}s",
        ]
        lines.extend(f"    {m}" for m in self.mismatches[:10])
        lines.extend(f"    {m}" for m in self.graph_violations[:10])
        return "\n".join(lines)


def run_random_suite(count: int = 500, seed: int = 20260808, budget: int = 100_000,
                     check_graphs: bool = True) -> SuiteReport:
    """Evaluate `count` random policies under both priorities."""
    rng = random.Random(seed)
    report = SuiteReport()
    started = time.perf_counter()
    for index in range(count):
        policy = random_policy(rng)
        report.policies += 1
        for priority in (engine.PRIORITY_PERMISSIONS, engine.PRIORITY_PROHIBITIONS):
            tag = f"policy #{index} (seed {seed}, priority {priority})"
            try:
                result = engine.evaluate(policy, (), priority, budget)
            except BudgetExhaustedError:
                report.budget_exhaustions += 1
                continue
            report.evaluations += 1
            verdict = authz.compare_with_oracle(result.pars, result.relations, priority)
            if not verdict.ok:
                report.mismatches.append(f"{tag}: {verdict.describe()}")
            if check_graphs:
                g = graph.build_graph(result.pars, policy.registry)
                violations = graph.check_well_typed(g)
                if violations:
                    report.graph_violations.append(f"{tag}: {violations[0]}")
                for par in result.pars:
                    if par.sign is Answer.GRANT and not graph.has_grant_path(g, par):
                        report.graph_violations.append(f"{tag}: no grant path for {par}")
                        break
    report.elapsed_seconds = time.perf_counter() - started
    return report
