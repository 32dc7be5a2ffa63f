"""Loads and validates a policy directory into immutable registries.

A policy lives in one directory of JSON files with fixed names:

    principal.json   [{"id": "000001", "name": "P. Cox", "title": "MD"}, ...]
    category.json    [{"id": "clinician", "name": "Clinician"}, ...]
    action.json      [{"id": "read", "name": "Read"}, ...]
    resource.json    [{"id": "record", "name": "Patient record"}, ...]
    site.json        optional, same shape as category.json
    hierarchy.json   optional, [{"child": "nurse", "parent": "clinician"}, ...]
    pca.json         [{"principal": "000001", "category": "physician_specialist"}, ...]
    arca.json        [{"category": "clinician", "action": "read", "resource": "prescription"}, ...]
    barca.json       same shape as arca.json
    customfacts.json declarations of dynamic facts (see CustomFactDecl)

Loading is all-or-nothing: every problem found is collected and reported in
one ConfigError, so a `validate` run names them all at once.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import CbacError, ConfigError, CustomFactError
from .hierarchy import CategoryHierarchy
from .model import (
    Action,
    Arca,
    Barca,
    Category,
    CustomFactInstance,
    EntityRegistry,
    Pca,
    Permission,
    Principal,
    Resource,
    Site,
)

PARAMETER_TYPES = ("SELECTION", "BOOLEAN", "TEXT")
SELECTION_OPTION_TYPES = ("PRINCIPAL", "CATEGORY", "ACTION", "RESOURCE", "SITE")
_RESERVED_KIND_NAMES = frozenset({
    "Principal", "Category", "Action", "Resource", "Site", "Pca", "Arca", "Barca", "Par", "Permission",
})


def field_name_for_label(label: str) -> str:
    """Derive a rule-language field name from a parameter label.

    Labels are display strings; field names are the camelCased word
    sequence: "Critical state" -> criticalState, "Locked" -> locked.
    """
    parts = [p for p in re.split(r"[^0-9A-Za-z]+", label) if p]
    if not parts:
        raise CustomFactError(f"parameter label {label!r} yields no field name")
    head = parts[0][0].lower() + parts[0][1:]
    tail = [p[0].upper() + p[1:] for p in parts[1:]]
    return head + "".join(tail)


def kind_name_for_fact(fact_id: str) -> str:
    """Rule-language type name of a custom fact: BREAK_THE_GLASS -> BreakTheGlass."""
    return "".join(part.capitalize() for part in fact_id.split("_") if part)


@dataclass(frozen=True)
class ParameterDecl:
    type: str
    rank: int
    label: str
    description: str = ""
    option_type: str | None = None

    @property
    def field_name(self) -> str:
        return field_name_for_label(self.label)


@dataclass(frozen=True)
class CustomFactDecl:
    fact: str
    description: str = ""
    label: str = ""
    single: bool = False
    parameters: tuple[ParameterDecl, ...] = ()

    @property
    def kind_name(self) -> str:
        return kind_name_for_fact(self.fact)


@dataclass(frozen=True)
class PolicyConfig:
    registry: EntityRegistry
    hierarchy: CategoryHierarchy
    pcas: frozenset[Pca] = frozenset()
    arcas: frozenset[Arca] = frozenset()
    barcas: frozenset[Barca] = frozenset()
    custom_fact_decls: tuple[CustomFactDecl, ...] = ()
    _decl_index: dict[str, CustomFactDecl] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_decl_index", {d.fact: d for d in self.custom_fact_decls})

    def decl(self, fact_id: str) -> CustomFactDecl:
        d = self._decl_index.get(fact_id)
        if d is None:
            raise CustomFactError(f"no custom fact declared with id {fact_id!r}")
        return d


# ---------------------------------------------------------------------------
# Directory loading
# ---------------------------------------------------------------------------

_ENTITY_FILES = (
    ("principal.json", "PRINCIPAL", Principal, ("id", "name", "title"), True),
    ("category.json", "CATEGORY", Category, ("id", "name"), True),
    ("action.json", "ACTION", Action, ("id", "name"), True),
    ("resource.json", "RESOURCE", Resource, ("id", "name"), True),
    ("site.json", "SITE", Site, ("id", "name"), False),
)


class _Loader:
    def __init__(self, directory: Path, lenient: bool):
        self.directory = directory
        self.lenient = lenient
        self.issues: list[str] = []

    def problem(self, filename: str, message: str) -> None:
        self.issues.append(f"{filename}: {message}")

    def read_array(self, filename: str, required: bool) -> list[dict[str, Any]]:
        path = self.directory / filename
        if not path.is_file():
            if required:
                self.problem(filename, "file is missing")
            return []
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            self.problem(filename, f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
            return []
        if not isinstance(document, list):
            self.problem(filename, "top-level value must be an array")
            return []
        records = []
        for i, item in enumerate(document):
            if not isinstance(item, dict):
                self.problem(filename, f"entry {i} is not an object")
            else:
                records.append(item)
        return records

    def check_fields(self, filename: str, index: int, record: dict[str, Any],
                     allowed: tuple[str, ...], required: tuple[str, ...]) -> bool:
        ok = True
        for key in required:
            if key not in record:
                self.problem(filename, f"entry {index} is missing field {key!r}")
                ok = False
        if not self.lenient:
            for key in record:
                if key not in allowed:
                    self.problem(filename, f"entry {index} has unknown field {key!r}")
                    ok = False
        return ok

    def str_field(self, filename: str, index: int, record: dict[str, Any], key: str, default: str = "") -> str:
        value = record.get(key, default)
        if not isinstance(value, str):
            self.problem(filename, f"entry {index} field {key!r} must be a string")
            return default
        return value


def load_policy(directory: str | Path, lenient: bool = False) -> PolicyConfig:
    """Load and validate one policy directory; raises ConfigError listing
    every problem found when anything is wrong."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigError([f"{directory}: not a readable directory"])
    loader = _Loader(directory, lenient)

    tables: dict[str, dict[str, Any]] = {}
    for filename, kind, cls, fields, required in _ENTITY_FILES:
        table: dict[str, Any] = {}
        for i, record in enumerate(loader.read_array(filename, required)):
            if not loader.check_fields(filename, i, record, fields, ("id",)):
                continue
            values = {f: loader.str_field(filename, i, record, f) for f in fields if f in record or f == "id"}
            entity_id = values.get("id", "")
            if not entity_id:
                loader.problem(filename, f"entry {i} has an empty id")
                continue
            if entity_id in table:
                loader.problem(filename, f"duplicate id {entity_id!r} (entry {i})")
                continue
            table[entity_id] = cls(**{f: values.get(f, "") for f in fields})
        tables[kind] = table

    registry = EntityRegistry(
        principals=tables["PRINCIPAL"],
        categories=tables["CATEGORY"],
        actions=tables["ACTION"],
        resources=tables["RESOURCE"],
        sites=tables["SITE"],
    )

    def resolve(filename: str, index: int, kind: str, entity_id: str) -> bool:
        if entity_id in tables[kind]:
            return True
        loader.problem(filename, f"entry {index} references unknown {kind.lower()} {entity_id!r}")
        return False

    edges: set[tuple[str, str]] = set()
    for i, record in enumerate(loader.read_array("hierarchy.json", required=False)):
        if not loader.check_fields("hierarchy.json", i, record, ("child", "parent"), ("child", "parent")):
            continue
        child = loader.str_field("hierarchy.json", i, record, "child")
        parent = loader.str_field("hierarchy.json", i, record, "parent")
        if resolve("hierarchy.json", i, "CATEGORY", child) & resolve("hierarchy.json", i, "CATEGORY", parent):
            if child == parent:
                loader.problem("hierarchy.json", f"entry {i} is a self-edge on {child!r}")
            else:
                edges.add((child, parent))

    pcas: set[Pca] = set()
    for i, record in enumerate(loader.read_array("pca.json", required=True)):
        if not loader.check_fields("pca.json", i, record, ("principal", "category"), ("principal", "category")):
            continue
        principal = loader.str_field("pca.json", i, record, "principal")
        category = loader.str_field("pca.json", i, record, "category")
        if resolve("pca.json", i, "PRINCIPAL", principal) & resolve("pca.json", i, "CATEGORY", category):
            pcas.add(Pca(principal, category))

    def load_permission_file(filename: str, cls: type) -> frozenset:
        found = set()
        for i, record in enumerate(loader.read_array(filename, required=True)):
            if not loader.check_fields(filename, i, record, ("category", "action", "resource"),
                                       ("category", "action", "resource")):
                continue
            category = loader.str_field(filename, i, record, "category")
            action = loader.str_field(filename, i, record, "action")
            resource = loader.str_field(filename, i, record, "resource")
            if (resolve(filename, i, "CATEGORY", category)
                    & resolve(filename, i, "ACTION", action)
                    & resolve(filename, i, "RESOURCE", resource)):
                found.add(cls(category, Permission(action, resource)))
        return frozenset(found)

    arcas = load_permission_file("arca.json", Arca)
    barcas = load_permission_file("barca.json", Barca)
    decls = _load_custom_facts(loader, tables)

    hierarchy = None
    if not loader.issues:
        try:
            hierarchy = CategoryHierarchy.build(set(tables["CATEGORY"]), edges)
        except CbacError as exc:
            loader.problem("hierarchy.json", str(exc))
    if loader.issues:
        raise ConfigError(loader.issues)
    assert hierarchy is not None
    return PolicyConfig(registry, hierarchy, frozenset(pcas), arcas, barcas, tuple(decls))


def _load_custom_facts(loader: _Loader, tables: dict[str, dict[str, Any]]) -> list[CustomFactDecl]:
    decls: list[CustomFactDecl] = []
    seen: set[str] = set()
    filename = "customfacts.json"
    for i, record in enumerate(loader.read_array(filename, required=True)):
        if not loader.check_fields(filename, i, record,
                                   ("fact", "description", "label", "single", "parameters"), ("fact",)):
            continue
        fact_id = loader.str_field(filename, i, record, "fact")
        if not fact_id:
            loader.problem(filename, f"entry {i} has an empty fact id")
            continue
        if fact_id in seen:
            loader.problem(filename, f"duplicate fact id {fact_id!r} (entry {i})")
            continue
        seen.add(fact_id)
        kind_name = kind_name_for_fact(fact_id)
        if kind_name in _RESERVED_KIND_NAMES:
            loader.problem(filename, f"entry {i}: fact id {fact_id!r} maps to the reserved kind name {kind_name}")
            continue
        if kind_name in {kind_name_for_fact(d.fact) for d in decls}:
            loader.problem(filename, f"entry {i}: fact id {fact_id!r} collides with another fact's kind name")
            continue
        single = record.get("single", False)
        if not isinstance(single, bool):
            loader.problem(filename, f"entry {i} field 'single' must be a boolean")
            single = False
        raw_params = record.get("parameters", [])
        if not isinstance(raw_params, list):
            loader.problem(filename, f"entry {i} field 'parameters' must be an array")
            raw_params = []
        params: list[ParameterDecl] = []
        for j, raw in enumerate(raw_params):
            where = f"entry {i} parameter {j}"
            if not isinstance(raw, dict):
                loader.problem(filename, f"{where} is not an object")
                continue
            if not loader.check_fields(filename, i, raw,
                                       ("type", "rank", "label", "description", "optionType"),
                                       ("type", "rank", "label")):
                continue
            ptype = raw.get("type")
            rank = raw.get("rank")
            label = loader.str_field(filename, i, raw, "label")
            description = loader.str_field(filename, i, raw, "description")
            option_type = raw.get("optionType")
            if ptype not in PARAMETER_TYPES:
                loader.problem(filename, f"{where} has unknown type {ptype!r}")
                continue
            if not isinstance(rank, int) or rank < 0:
                loader.problem(filename, f"{where} rank must be a non-negative integer")
                continue
            if ptype == "SELECTION":
                if option_type not in SELECTION_OPTION_TYPES:
                    loader.problem(filename, f"{where} needs an optionType out of {SELECTION_OPTION_TYPES}")
                    continue
            elif option_type is not None:
                loader.problem(filename, f"{where} only SELECTION parameters carry an optionType")
                continue
            try:
                field_name_for_label(label)
            except CustomFactError as exc:
                loader.problem(filename, f"{where}: {exc}")
                continue
            params.append(ParameterDecl(ptype, rank, label, description, option_type))
        params.sort(key=lambda p: p.rank)
        ranks = [p.rank for p in params]
        if ranks != list(range(len(ranks))):
            loader.problem(filename, f"entry {i} parameter ranks must be 0..n-1 without gaps, got {ranks}")
            continue
        names = [p.field_name for p in params]
        if len(set(names)) != len(names):
            loader.problem(filename, f"entry {i} parameter labels collide after field-name derivation: {names}")
            continue
        decls.append(CustomFactDecl(
            fact=fact_id,
            description=loader.str_field(filename, i, record, "description"),
            label=loader.str_field(filename, i, record, "label"),
            single=single,
            parameters=tuple(params),
        ))
    return decls


# ---------------------------------------------------------------------------
# Custom fact value validation
# ---------------------------------------------------------------------------

def validate_custom_fact_values(decl: CustomFactDecl, values: list[Any] | tuple[Any, ...],
                                registry: EntityRegistry) -> CustomFactInstance:
    """Check a value list against the declaration and return the instance."""
    if len(values) != len(decl.parameters):
        raise CustomFactError(
            f"{decl.fact}: expected {len(decl.parameters)} parameter value(s), got {len(values)}")
    checked: list[bool | str] = []
    for param, value in zip(decl.parameters, values):
        where = f"{decl.fact} parameter {param.rank} ({param.label})"
        if param.type == "BOOLEAN":
            if not isinstance(value, bool):
                raise CustomFactError(f"{where}: expected a boolean, got {value!r}")
            checked.append(value)
        elif param.type == "TEXT":
            if not isinstance(value, str):
                raise CustomFactError(f"{where}: expected a string, got {value!r}")
            checked.append(value)
        else:  # SELECTION
            if not isinstance(value, str):
                raise CustomFactError(f"{where}: expected a {param.option_type} id, got {value!r}")
            assert param.option_type is not None
            if value not in registry.by_kind(param.option_type):
                raise CustomFactError(f"{where}: unknown {param.option_type} id {value!r}")
            checked.append(value)
    return CustomFactInstance(decl.fact, tuple(checked))


def validate_custom_fact_list(config: PolicyConfig,
                              entries: list[tuple[str, list[Any]]]) -> list[CustomFactInstance]:
    """Validate a whole scenario, enforcing at-most-one for single facts."""
    instances: list[CustomFactInstance] = []
    singles_seen: set[str] = set()
    for fact_id, values in entries:
        decl = config.decl(fact_id)
        if decl.single:
            if fact_id in singles_seen:
                raise CustomFactError(f"{fact_id} is declared single and may appear at most once per session")
            singles_seen.add(fact_id)
        instances.append(validate_custom_fact_values(decl, values, config.registry))
    return instances
