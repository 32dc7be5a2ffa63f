from __future__ import annotations

from pathlib import Path

import pytest

from cbac.config import PolicyConfig, load_policy
from cbac.hierarchy import CategoryHierarchy
from cbac.model import (
    Action,
    Arca,
    Barca,
    Category,
    EntityRegistry,
    Pca,
    Permission,
    Principal,
    Resource,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def hospital_dir() -> Path:
    return FIXTURES / "hospital"


@pytest.fixture(scope="session")
def hospital(hospital_dir) -> PolicyConfig:
    return load_policy(hospital_dir)


def build_policy(principals=(), categories=(), actions=(), resources=(),
                 edges=(), pcas=(), arcas=(), barcas=(), decls=()) -> PolicyConfig:
    """Small programmatic policies for targeted tests.

    principals/categories/actions/resources are id strings; pcas are
    (principal, category) pairs; arcas/barcas are (category, action,
    resource) triples; edges are (child, parent) pairs.
    """
    registry = EntityRegistry(
        {p: Principal(p, p.title()) for p in principals},
        {c: Category(c, c.title()) for c in categories},
        {a: Action(a, a.title()) for a in actions},
        {r: Resource(r, r.title()) for r in resources},
        {},
    )
    hierarchy = CategoryHierarchy.build(set(categories), set(edges))
    return PolicyConfig(
        registry,
        hierarchy,
        frozenset(Pca(p, c) for p, c in pcas),
        frozenset(Arca(c, Permission(a, r)) for c, a, r in arcas),
        frozenset(Barca(c, Permission(a, r)) for c, a, r in barcas),
        tuple(decls),
    )


@pytest.fixture
def chain_policy() -> PolicyConfig:
    """The inherited-permission narrative: a specialist inherits a read
    permission attached three levels up."""
    return build_policy(
        principals=("p1",),
        categories=("specialist", "resident", "intern"),
        actions=("read",),
        resources=("record",),
        edges=(("specialist", "resident"), ("resident", "intern")),
        pcas=(("p1", "specialist"),),
        arcas=(("intern", "read", "record"),),
    )


@pytest.fixture
def conflict_policy() -> PolicyConfig:
    """Arca and Barca colliding on the same (category, action, resource)."""
    return build_policy(
        principals=("p1",),
        categories=("c1",),
        actions=("read",),
        resources=("r1",),
        pcas=(("p1", "c1"),),
        arcas=(("c1", "read", "r1"),),
        barcas=(("c1", "read", "r1"),),
    )
