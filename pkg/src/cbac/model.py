"""Entity, relation and result types shared by every other module.

All values are immutable after construction. Relation facts hold entity
references by id string and are resolved through an :class:`EntityRegistry`
built at load time, which keeps working-memory facts value-like: structural
equality doubles as fact identity for duplicate suppression and deletion.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import CbacError, UnknownIdError


class Answer(enum.Enum):
    """Possible answers to an access request."""

    GRANT = "grant"
    DENY = "deny"
    UNDETERMINED = "undetermined"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True, slots=True)
class Principal:
    id: str
    name: str = ""
    title: str = ""


@dataclass(frozen=True, slots=True)
class Category:
    id: str
    name: str = ""


@dataclass(frozen=True, slots=True)
class Action:
    id: str
    name: str = ""


@dataclass(frozen=True, slots=True)
class Resource:
    id: str
    name: str = ""


@dataclass(frozen=True, slots=True)
class Site:
    id: str
    name: str = ""


Entity = Principal | Category | Action | Resource | Site

#: registry kind token -> entity class
ENTITY_KINDS = {
    "PRINCIPAL": Principal,
    "CATEGORY": Category,
    "ACTION": Action,
    "RESOURCE": Resource,
    "SITE": Site,
}


@dataclass(frozen=True, slots=True)
class Permission:
    """An (action, resource) pair, referenced by entity ids."""

    action: str
    resource: str


@dataclass(frozen=True, slots=True)
class Pca:
    """Principal-to-category assignment."""

    principal: str
    category: str


@dataclass(frozen=True, slots=True)
class Arca:
    """Permission granted to a category."""

    category: str
    permission: Permission


@dataclass(frozen=True, slots=True)
class Barca:
    """Permission banned for a category."""

    category: str
    permission: Permission


@dataclass(frozen=True, slots=True)
class CustomFactInstance:
    """One injected dynamic fact: a declared fact id plus its parameter values.

    Values are kept in rank order; SELECTION parameters hold the chosen
    entity id, BOOLEAN parameters a bool, TEXT parameters a string.
    """

    fact_id: str
    values: tuple[bool | str, ...] = ()


@dataclass(frozen=True, slots=True)
class Par:
    """A computed authorization (or prohibition) with its inheritance chain.

    ``chain[0]`` is the category the principal is assigned to and
    ``chain[-1]`` the category holding the permission (grant) or the
    prohibition (deny); a single-element chain is a direct assignment.
    """

    principal: str
    chain: tuple[str, ...]
    permission: Permission
    sign: Answer = Answer.GRANT

    def __post_init__(self) -> None:
        if not self.chain:
            raise CbacError("Par chain must be non-empty")
        if self.sign is Answer.UNDETERMINED:
            raise CbacError("Par sign must be grant or deny")


#: the kinds of values the rule session can hold in working memory
Fact = Principal | Category | Action | Resource | Site | Pca | Arca | Barca | CustomFactInstance


def fact_equals(a: Fact, b: Fact) -> bool:
    """True iff both facts have the same kind and structurally equal fields."""
    return type(a) is type(b) and a == b


@dataclass(frozen=True)
class EntityRegistry:
    """Immutable id -> entity lookup for each entity kind."""

    principals: dict[str, Principal] = field(default_factory=dict)
    categories: dict[str, Category] = field(default_factory=dict)
    actions: dict[str, Action] = field(default_factory=dict)
    resources: dict[str, Resource] = field(default_factory=dict)
    sites: dict[str, Site] = field(default_factory=dict)

    def by_kind(self, kind: str) -> dict[str, Entity]:
        table = {
            "PRINCIPAL": self.principals,
            "CATEGORY": self.categories,
            "ACTION": self.actions,
            "RESOURCE": self.resources,
            "SITE": self.sites,
        }.get(kind.upper())
        if table is None:
            raise CbacError(f"unknown entity kind {kind!r}")
        return table

    def get(self, kind: str, entity_id: str) -> Entity:
        table = self.by_kind(kind)
        entity = table.get(entity_id)
        if entity is None:
            raise UnknownIdError(kind.lower(), entity_id)
        return entity

    def principal(self, entity_id: str) -> Principal:
        return self.get("PRINCIPAL", entity_id)  # type: ignore[return-value]

    def category(self, entity_id: str) -> Category:
        return self.get("CATEGORY", entity_id)  # type: ignore[return-value]

    def action(self, entity_id: str) -> Action:
        return self.get("ACTION", entity_id)  # type: ignore[return-value]

    def resource(self, entity_id: str) -> Resource:
        return self.get("RESOURCE", entity_id)  # type: ignore[return-value]


def make_permission(action_id: str, resource_id: str, registry: EntityRegistry) -> Permission:
    """Build a Permission after checking both ids resolve in the registry."""
    registry.action(action_id)
    registry.resource(resource_id)
    return Permission(action=action_id, resource=resource_id)
