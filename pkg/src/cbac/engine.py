"""Stateful forward-chaining session over value-semantics working memory.

A session is seeded with the policy's entities and relation facts plus any
injected custom facts, then fires rule activations in salience order until
quiescence. Matching is naive (nested iteration per pattern) but hides two
cheap accelerations behind the same semantics: per-pass candidate filtering
on constraints that only touch the pattern's own fact, and hash-joins on
equality constraints against already-bound variables. Refraction keeps a
rule from re-firing on a fact tuple it already consumed; deleting a fact
bumps its epoch so delete+insert re-triggers rules.

Collected authorizations go to a ParSink global: appending to it never
re-triggers matching.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any, Callable, Iterable, Sequence

from . import rulelang
from .config import CustomFactDecl, PolicyConfig, validate_custom_fact_list
from .errors import BudgetExhaustedError, CbacError, UnknownFactKindError
from .hierarchy import CategoryHierarchy
from .model import (
    Action,
    Arca,
    Barca,
    Category,
    CustomFactInstance,
    EntityRegistry,
    Fact,
    Par,
    Pca,
    Permission,
    Principal,
    Resource,
    Site,
    make_permission,
)
from .rulelang import (
    CategoryLookup,
    CollectParAction,
    Comparison,
    ContainsCheck,
    DeleteAction,
    FactCtor,
    FieldBinding,
    FieldPath,
    InsertAction,
    Literal,
    Pattern,
    PermissionCtor,
    RuleAst,
    VarRef,
)

PRIORITY_PERMISSIONS = "permissions"
PRIORITY_PROHIBITIONS = "prohibitions"

_MODEL_CLASSES: dict[str, type] = {
    "Principal": Principal,
    "Category": Category,
    "Action": Action,
    "Resource": Resource,
    "Site": Site,
    "Pca": Pca,
    "Arca": Arca,
    "Barca": Barca,
}

# field -> (step kind, detail); used for path validation at bind time
_FIELD_SCHEMAS: dict[str, dict[str, tuple[str, str]]] = {
    "Principal": {"id": ("str", ""), "name": ("str", ""), "title": ("str", "")},
    "Category": {"id": ("str", ""), "name": ("str", "")},
    "Action": {"id": ("str", ""), "name": ("str", "")},
    "Resource": {"id": ("str", ""), "name": ("str", "")},
    "Site": {"id": ("str", ""), "name": ("str", "")},
    "Pca": {"principal": ("entity", "Principal"), "category": ("entity", "Category")},
    "Arca": {"category": ("entity", "Category"), "permission": ("value", "Permission")},
    "Barca": {"category": ("entity", "Category"), "permission": ("value", "Permission")},
    "Permission": {"action": ("entity", "Action"), "resource": ("entity", "Resource")},
}

_OPTION_TYPE_TO_SCHEMA = {
    "PRINCIPAL": "Principal",
    "CATEGORY": "Category",
    "ACTION": "Action",
    "RESOURCE": "Resource",
    "SITE": "Site",
}


def validate_field_path(kind: str, path: Sequence[str],
                        custom_kinds: dict[str, CustomFactDecl]) -> None:
    """Walk a dotted path through the field schemas; raise on a bad segment."""
    at = kind
    for seg in path:
        if at in custom_kinds:
            decl = custom_kinds[at]
            params = {p.field_name: p for p in decl.parameters}
            param = params.get(seg)
            if param is None:
                raise CbacError(f"{kind}: custom fact {decl.fact} has no field {seg!r} "
                                f"(has: {', '.join(sorted(params)) or 'none'})")
            if param.type == "SELECTION":
                at = _OPTION_TYPE_TO_SCHEMA[param.option_type or ""]
            else:
                at = "bool" if param.type == "BOOLEAN" else "str"
            continue
        schema = _FIELD_SCHEMAS.get(at)
        if schema is None or seg not in (schema or {}):
            raise CbacError(f"invalid field path segment {seg!r} on {at}")
        step_kind, detail = schema[seg]
        at = detail if step_kind in ("entity", "value") else step_kind


# ---------------------------------------------------------------------------
# Pars sink (a "global": mutating it never re-triggers matching)
# ---------------------------------------------------------------------------

class ParSink:
    """Append-only Par collection, deduplicated by structural equality."""

    def __init__(self) -> None:
        self._pars: list[Par] = []
        self._seen: set[Par] = set()

    def add(self, par: Par) -> bool:
        if par in self._seen:
            return False
        self._seen.add(par)
        self._pars.append(par)
        return True

    def as_tuple(self) -> tuple[Par, ...]:
        return tuple(self._pars)

    def __len__(self) -> int:
        return len(self._pars)

    def __iter__(self):
        return iter(self._pars)


# ---------------------------------------------------------------------------
# Compiled rules
# ---------------------------------------------------------------------------

@dataclass
class _CompiledPattern:
    pattern: Pattern
    kind: str
    known: bool                     # False when the kind is an undeclared custom fact: matches nothing
    local: list[Callable]           # fact -> bool, no outer environment needed
    join_eq: list[tuple[Callable, Callable]]  # (fact -> value, env -> value) equality pairs
    steps: list[tuple[str, Any]]    # ordered residual work: ("bind", (var, fact->value)) | ("check", (env, fact)->bool)


@dataclass
class _CompiledRule:
    rule: RuleAst
    index: int
    positives: list[_CompiledPattern]
    negatives: list[_CompiledPattern]

    @property
    def name(self) -> str:
        return self.rule.name

    @property
    def salience(self) -> int:
        return self.rule.salience


@dataclass(frozen=True)
class Activation:
    """One satisfied rule instance: the matched facts and their bindings."""

    rule: RuleAst
    facts: tuple[Fact, ...]
    bindings: dict[str, Any] = field(compare=False)
    fingerprint: tuple = field(compare=False)
    _order: tuple = field(compare=False, repr=False)


@dataclass(frozen=True)
class FiringReport:
    fired_count: int
    iterations: int


@dataclass(frozen=True)
class EvaluationResult:
    pars: tuple[Par, ...]
    relations: Any  # authz.BaseRelations; typed loosely to avoid an import cycle
    report: FiringReport


@dataclass(frozen=True, slots=True)
class _Entry:
    fact: Fact
    seq: int
    epoch: int


class Session:
    """One rule-engine run: working memory, agenda, refraction state."""

    def __init__(self, policy: PolicyConfig, rules: Sequence[RuleAst], budget: int = 100_000):
        if budget <= 0:
            raise CbacError("iteration budget must be positive")
        self.policy = policy
        self.registry: EntityRegistry = policy.registry
        self.hierarchy: CategoryHierarchy = policy.hierarchy
        self.budget = budget
        self.pars = ParSink()
        self._wm: dict[Fact, _Entry] = {}
        self._by_kind: dict[str, dict[Fact, _Entry]] = {}
        self._delete_counts: dict[Fact, int] = {}
        self._seq = itertools.count()
        self._fired: set[tuple] = set()
        self._custom_by_kind: dict[str, CustomFactDecl] = {d.kind_name: d for d in policy.custom_fact_decls}
        self._custom_by_id: dict[str, CustomFactDecl] = {d.fact: d for d in policy.custom_fact_decls}
        names = [r.name for r in rules]
        if len(set(names)) != len(names):
            duplicate = next(n for n in names if names.count(n) > 1)
            raise CbacError(f"duplicate rule name {duplicate!r} in session rule set")
        self._rules = [self._compile_rule(r, i) for i, r in enumerate(rules)]
        self._rules.sort(key=lambda cr: (-cr.salience, cr.index))
        # per-match-pass caches
        self._alpha_cache: dict[int, list[_Entry]] = {}
        self._index_cache: dict[int, dict[tuple, list[_Entry]]] = {}

    # ------------------------------------------------------------------
    # Working memory
    # ------------------------------------------------------------------

    def _kind_of(self, fact: Fact) -> str:
        if isinstance(fact, CustomFactInstance):
            decl = self._custom_by_id.get(fact.fact_id)
            if decl is None:
                raise UnknownFactKindError(fact.fact_id, "working memory insert")
            return decl.kind_name
        return type(fact).__name__

    def _check_references(self, fact: Fact) -> None:
        if isinstance(fact, Pca):
            self.registry.principal(fact.principal)
            self.registry.category(fact.category)
        elif isinstance(fact, (Arca, Barca)):
            self.registry.category(fact.category)
            self.registry.action(fact.permission.action)
            self.registry.resource(fact.permission.resource)
        elif isinstance(fact, CustomFactInstance):
            pass  # validated against its declaration before reaching the session
        else:
            registered = self.registry.by_kind(type(fact).__name__.upper()).get(fact.id)
            if registered != fact:
                raise CbacError(f"{type(fact).__name__} {fact.id!r} is not the registered entity")

    def insert_fact(self, fact: Fact) -> bool:
        """Add a fact unless a structurally equal one is present."""
        self._check_references(fact)
        if fact in self._wm:
            return False
        entry = _Entry(fact, next(self._seq), self._delete_counts.get(fact, 0))
        self._wm[fact] = entry
        self._by_kind.setdefault(self._kind_of(fact), {})[fact] = entry
        return True

    def delete_fact(self, fact: Fact) -> bool:
        """Remove the fact_equals-matching fact if present."""
        entry = self._wm.pop(fact, None)
        if entry is None:
            return False
        del self._by_kind[self._kind_of(fact)][fact]
        self._delete_counts[fact] = entry.epoch + 1
        return True

    def working_memory(self) -> tuple[Fact, ...]:
        return tuple(self._wm)

    def seed(self, custom_facts: Iterable[CustomFactInstance] = ()) -> None:
        registry = self.registry
        for table in (registry.principals, registry.categories, registry.actions, registry.resources):
            for entity in table.values():
                self.insert_fact(entity)
        for pca in sorted(self.policy.pcas, key=lambda f: (f.principal, f.category)):
            self.insert_fact(pca)
        for arca in sorted(self.policy.arcas, key=lambda f: (f.category, f.permission.action, f.permission.resource)):
            self.insert_fact(arca)
        for barca in sorted(self.policy.barcas, key=lambda f: (f.category, f.permission.action, f.permission.resource)):
            self.insert_fact(barca)
        singles_seen: set[str] = set()
        for instance in custom_facts:
            decl = self._custom_by_id.get(instance.fact_id)
            if decl is None:
                raise UnknownFactKindError(instance.fact_id, "session seed")
            if decl.single and decl.fact in singles_seen:
                raise CbacError(f"custom fact {decl.fact} is declared single and was supplied twice")
            singles_seen.add(decl.fact)
            self.insert_fact(instance)

    # ------------------------------------------------------------------
    # Field resolution
    # ------------------------------------------------------------------

    def resolve_path(self, value: Any, path: Sequence[str]) -> Any:
        for seg in path:
            value = self._step(value, seg)
        return value

    def _step(self, value: Any, seg: str) -> Any:
        cls = type(value)
        if cls is Pca:
            if seg == "principal":
                return self.registry.principal(value.principal)
            if seg == "category":
                return self.registry.category(value.category)
        elif cls is Arca or cls is Barca:
            if seg == "category":
                return self.registry.category(value.category)
            if seg == "permission":
                return value.permission
        elif cls is Permission:
            if seg == "action":
                return self.registry.action(value.action)
            if seg == "resource":
                return self.registry.resource(value.resource)
        elif cls is CustomFactInstance:
            decl = self._custom_by_id[value.fact_id]
            for i, param in enumerate(decl.parameters):
                if param.field_name == seg:
                    raw = value.values[i]
                    if param.type == "SELECTION":
                        return self.registry.get(param.option_type or "", str(raw))
                    return raw
        else:
            attr = getattr(value, seg, None)
            if attr is not None:
                return attr
        raise CbacError(f"no field {seg!r} on {cls.__name__}")

    # ------------------------------------------------------------------
    # Rule compilation
    # ------------------------------------------------------------------

    def _compile_rule(self, rule: RuleAst, index: int) -> _CompiledRule:
        bound: set[str] = set()
        positives: list[_CompiledPattern] = []
        negatives: list[_CompiledPattern] = []
        for pattern in rule.patterns:
            compiled = self._compile_pattern(rule, pattern)
            if pattern.negated:
                negatives.append(compiled)
            else:
                positives.append(compiled)
                if pattern.binding:
                    bound.add(pattern.binding)
                for c in pattern.constraints:
                    if isinstance(c, FieldBinding):
                        bound.add(c.var)
        for action in rule.actions:
            self._check_action(rule, action, bound)
        return _CompiledRule(rule, index, positives, negatives)

    def _compile_pattern(self, rule: RuleAst, pattern: Pattern) -> _CompiledPattern:
        kind = pattern.kind
        # a rule about a custom fact this policy never declares can simply
        # never fire; its paths cannot be validated either
        known = kind in _MODEL_CLASSES or kind in self._custom_by_kind
        local: list[Callable] = []
        join_eq: list[tuple[Callable, Callable]] = []
        steps: list[tuple[str, Any]] = []
        own_bound: set[str] = set()
        if not known:
            return _CompiledPattern(pattern, kind, known, local, join_eq, steps)

        def operand_vars(op) -> set[str]:
            return {op.var} if isinstance(op, VarRef) else set()

        for constraint in pattern.constraints:
            if isinstance(constraint, FieldBinding):
                validate_field_path(kind, constraint.path, self._custom_by_kind)
                getter = self._compile_fact_getter(constraint.path)
                steps.append(("bind", (constraint.var, getter)))
                own_bound.add(constraint.var)
                continue
            if isinstance(constraint, Comparison):
                self._validate_operand(rule, kind, constraint.left)
                self._validate_operand(rule, kind, constraint.right)
                used = operand_vars(constraint.left) | operand_vars(constraint.right)
                if not used:
                    local.append(self._compile_local_comparison(constraint))
                    continue
                if constraint.op == "==" and not (used & own_bound):
                    spec = self._try_join_spec(constraint)
                    if spec is not None:
                        join_eq.append(spec)
                        continue
                steps.append(("check", self._compile_env_comparison(constraint)))
                continue
            if isinstance(constraint, ContainsCheck):
                self._validate_operand(rule, kind, constraint.general)
                self._validate_operand(rule, kind, constraint.specific)
                used = operand_vars(constraint.general) | operand_vars(constraint.specific)
                check = self._compile_contains(constraint)
                if not used:
                    local.append(lambda fact, _c=check: _c(None, fact))
                else:
                    steps.append(("check", check))
                continue
            raise CbacError(f"unknown constraint node {constraint!r}")
        return _CompiledPattern(pattern, kind, known, local, join_eq, steps)

    def _validate_operand(self, rule: RuleAst, kind: str, op) -> None:
        if isinstance(op, FieldPath):
            validate_field_path(kind, op.path, self._custom_by_kind)
        # VarRef paths are validated dynamically: the variable's kind is only
        # known per-binding, and bindings may hold entity or plain values.

    def _compile_fact_getter(self, path: tuple[str, ...]) -> Callable:
        if len(path) == 1:
            seg = path[0]
            return lambda fact: self._step(fact, seg)
        return lambda fact: self.resolve_path(fact, path)

    def _compile_operand(self, op) -> Callable:
        """Return (env, fact) -> value."""
        if isinstance(op, Literal):
            value = op.value
            return lambda env, fact: value
        if isinstance(op, FieldPath):
            path = op.path
            return lambda env, fact: self.resolve_path(fact, path)
        if isinstance(op, VarRef):
            var, path = op.var, op.path
            if path:
                return lambda env, fact: self.resolve_path(env[var], path)
            return lambda env, fact: env[var]
        if isinstance(op, CategoryLookup):
            cid = op.category_id
            return lambda env, fact: self.registry.category(cid)
        raise CbacError(f"unsupported operand {op!r}")

    def _compile_local_comparison(self, c: Comparison) -> Callable:
        left = self._compile_operand(c.left)
        right = self._compile_operand(c.right)
        if c.op == "==":
            return lambda fact: left(None, fact) == right(None, fact)
        return lambda fact: left(None, fact) != right(None, fact)

    def _compile_env_comparison(self, c: Comparison) -> Callable:
        left = self._compile_operand(c.left)
        right = self._compile_operand(c.right)
        if c.op == "==":
            return lambda env, fact: left(env, fact) == right(env, fact)
        return lambda env, fact: left(env, fact) != right(env, fact)

    def _try_join_spec(self, c: Comparison) -> tuple[Callable, Callable] | None:
        """For `ownfield == $outer` shapes return (fact->value, env->value)."""
        if isinstance(c.left, FieldPath) and isinstance(c.right, (VarRef, Literal, CategoryLookup)):
            fact_side, env_side = c.left, c.right
        elif isinstance(c.right, FieldPath) and isinstance(c.left, (VarRef, Literal, CategoryLookup)):
            fact_side, env_side = c.right, c.left
        else:
            return None
        fact_getter = self._compile_fact_getter(fact_side.path)
        env_getter = self._compile_operand(env_side)
        return fact_getter, (lambda env, _g=env_getter: _g(env, None))

    def _category_id_of(self, value: Any) -> str:
        if isinstance(value, Category):
            return value.id
        if isinstance(value, str):
            return value
        raise CbacError(f"expected a category or category id, got {value!r}")

    def _compile_contains(self, c: ContainsCheck) -> Callable:
        general = self._compile_operand(c.general)
        specific = self._compile_operand(c.specific)
        contains = self.hierarchy.contains_or_equals

        def check(env, fact):
            return contains(self._category_id_of(general(env, fact)),
                            self._category_id_of(specific(env, fact)))
        return check

    def _check_action(self, rule: RuleAst, action, bound: set[str]) -> None:
        def check_expr(expr) -> None:
            if isinstance(expr, VarRef):
                if expr.var not in bound:
                    raise CbacError(f"rule {rule.name!r}: action references unbound variable {expr.var}")
            elif isinstance(expr, PermissionCtor):
                check_expr(expr.action)
                check_expr(expr.resource)

        if isinstance(action, InsertAction):
            if action.ctor.kind not in ("Pca", "Arca", "Barca"):
                raise CbacError(f"rule {rule.name!r}: cannot insert facts of kind {action.ctor.kind}")
            for arg in action.ctor.args:
                check_expr(arg)
        elif isinstance(action, DeleteAction):
            if action.var not in bound:
                raise CbacError(f"rule {rule.name!r}: delete references unbound variable {action.var}")
        elif isinstance(action, CollectParAction):
            for expr in (action.principal, action.chain_start, action.chain_end, action.permission):
                check_expr(expr)

    # ------------------------------------------------------------------
    # Matching
    # ------------------------------------------------------------------

    def _candidates(self, rule_key: int, cp: _CompiledPattern) -> list[_Entry]:
        cached = self._alpha_cache.get(rule_key)
        if cached is not None:
            return cached
        table = self._by_kind.get(cp.kind, {})
        entries = list(table.values())
        for check in cp.local:
            entries = [e for e in entries if check(e.fact)]
        self._alpha_cache[rule_key] = entries
        return entries

    def _joined_candidates(self, rule_key: int, cp: _CompiledPattern, env: dict) -> list[_Entry]:
        entries = self._candidates(rule_key, cp)
        if not cp.join_eq or not entries:
            return entries
        index = self._index_cache.get(rule_key)
        if index is None:
            index = {}
            getters = [g for g, _ in cp.join_eq]
            for e in entries:
                key = tuple(g(e.fact) for g in getters)
                index.setdefault(key, []).append(e)
            self._index_cache[rule_key] = index
        probe = tuple(eg(env) for _, eg in cp.join_eq)
        return index.get(probe, [])

    def _pattern_admits(self, cp: _CompiledPattern, entry: _Entry, env: dict) -> list[str] | None:
        """Apply bindings and residual checks; returns added env keys or None."""
        added: list[str] = []
        for op, payload in cp.steps:
            if op == "bind":
                var, getter = payload
                env[var] = getter(entry.fact)
                added.append(var)
            else:
                if not payload(env, entry.fact):
                    for k in added:
                        del env[k]
                    return None
        return added

    def _negation_holds(self, crule: _CompiledRule, env: dict) -> bool:
        """True when no fact matches any negated pattern under env."""
        for ni, cp in enumerate(crule.negatives):
            rule_key = (crule.index << 8) | (200 + ni)
            for entry in self._joined_candidates(rule_key, cp, env):
                added = self._pattern_admits(cp, entry, env)
                if added is not None:
                    for k in added:
                        del env[k]
                    return False
        return True

    def _match_rule(self, crule: _CompiledRule) -> list[Activation]:
        if any(not cp.known for cp in crule.positives):
            return []
        results: list[Activation] = []
        env: dict[str, Any] = {}
        entries_stack: list[_Entry] = []
        fired = self._fired
        positives = crule.positives

        def recurse(i: int) -> None:
            if i == len(positives):
                fingerprint = (crule.name, tuple((e.fact, e.epoch) for e in entries_stack))
                if fingerprint in fired:
                    return
                if crule.negatives and not self._negation_holds(crule, env):
                    return
                order = tuple(sorted(-e.seq for e in entries_stack))
                results.append(Activation(crule.rule, tuple(e.fact for e in entries_stack),
                                          dict(env), fingerprint, order))
                return
            cp = positives[i]
            rule_key = (crule.index << 8) | i
            for entry in self._joined_candidates(rule_key, cp, env):
                if cp.pattern.binding:
                    env[cp.pattern.binding] = entry.fact
                added = self._pattern_admits(cp, entry, env)
                if added is not None:
                    entries_stack.append(entry)
                    recurse(i + 1)
                    entries_stack.pop()
                    for k in added:
                        del env[k]
                if cp.pattern.binding:
                    del env[cp.pattern.binding]

        recurse(0)
        results.sort(key=lambda a: a._order)
        return results

    def match_activations(self) -> list[Activation]:
        """All refraction-surviving activations, in firing order."""
        self._alpha_cache = {}
        self._index_cache = {}
        agenda: list[Activation] = []
        for crule in self._rules:  # already ordered by (salience desc, declaration)
            agenda.extend(self._match_rule(crule))
        return agenda

    # ------------------------------------------------------------------
    # Firing
    # ------------------------------------------------------------------

    def fire_until_quiescent(self) -> FiringReport:
        fired_count = 0
        iterations = 1
        recent: deque[str] = deque(maxlen=10)
        agenda = deque(self.match_activations())
        while agenda:
            activation = agenda.popleft()
            if fired_count >= self.budget:
                raise BudgetExhaustedError(self.budget, list(recent))
            self._fired.add(activation.fingerprint)
            fired_count += 1
            recent.append(activation.rule.name)
            if self._execute(activation):
                agenda = deque(self.match_activations())
                iterations += 1
        return FiringReport(fired_count, iterations)

    def _execute(self, activation: Activation) -> bool:
        changed = False
        env = activation.bindings
        for action in activation.rule.actions:
            if isinstance(action, InsertAction):
                changed |= self.insert_fact(self._build_fact(action.ctor, env))
            elif isinstance(action, DeleteAction):
                value = env[action.var]
                if not isinstance(value, (Principal, Category, Action, Resource, Site,
                                          Pca, Arca, Barca, CustomFactInstance)):
                    raise CbacError(f"delete({action.var}) does not name a working-memory fact")
                changed |= self.delete_fact(value)
            elif isinstance(action, CollectParAction):
                self.pars.add(self._build_par(action, env))
        return changed

    def _eval_expr(self, expr, env) -> Any:
        if isinstance(expr, Literal):
            return expr.value
        if isinstance(expr, VarRef):
            value = env[expr.var]
            return self.resolve_path(value, expr.path) if expr.path else value
        if isinstance(expr, CategoryLookup):
            return self.registry.category(expr.category_id)
        if isinstance(expr, PermissionCtor):
            action = self._entity_id(self._eval_expr(expr.action, env), Action, "action")
            resource = self._entity_id(self._eval_expr(expr.resource, env), Resource, "resource")
            return make_permission(action, resource, self.registry)
        raise CbacError(f"cannot evaluate expression {expr!r}")

    def _entity_id(self, value: Any, cls: type, kind: str) -> str:
        if isinstance(value, cls):
            return value.id
        if isinstance(value, str):
            self.registry.get(kind.upper(), value)
            return value
        raise CbacError(f"expected a {kind} or {kind} id, got {value!r}")

    def _build_fact(self, ctor: FactCtor, env) -> Fact:
        args = [self._eval_expr(a, env) for a in ctor.args]
        if ctor.kind == "Pca":
            if len(args) != 2:
                raise CbacError("new Pca(...) takes a principal and a category")
            return Pca(self._entity_id(args[0], Principal, "principal"),
                       self._entity_id(args[1], Category, "category"))
        if ctor.kind in ("Arca", "Barca"):
            if len(args) != 2 or not isinstance(args[1], Permission):
                raise CbacError(f"new {ctor.kind}(...) takes a category and a permission")
            cls = Arca if ctor.kind == "Arca" else Barca
            return cls(self._entity_id(args[0], Category, "category"), args[1])
        raise CbacError(f"cannot construct facts of kind {ctor.kind}")

    def _build_par(self, action: CollectParAction, env) -> Par:
        principal = self._entity_id(self._eval_expr(action.principal, env), Principal, "principal")
        start = self._category_id_of(self._eval_expr(action.chain_start, env))
        end = self._category_id_of(self._eval_expr(action.chain_end, env))
        if action.chain_kind == "permission":
            chain = self.hierarchy.permission_chain(start, end)
        else:
            chain = self.hierarchy.prohibition_chain(start, end)
        permission = self._eval_expr(action.permission, env)
        if not isinstance(permission, Permission):
            raise CbacError(f"pars.add expects a permission value, got {permission!r}")
        return Par(principal, chain, permission, action.sign)


# ---------------------------------------------------------------------------
# Bundled corpus + one-call evaluation
# ---------------------------------------------------------------------------

CORPUS_ORDER = (
    "add-custom-pcas",
    "responsible-physician",
    "critical-state-read-all",
    "critical-state-remove-read-prohibitions",
    "sealed-and-locked",
    "sealed-break-the-glass",
    "conflicts-remove-barca",
    "conflicts-remove-arca",
    "pars-permissions",
    "pars-prohibitions",
)


@lru_cache(maxsize=None)
def load_corpus() -> dict[str, tuple[RuleAst, ...]]:
    """Parse every bundled rule file once; keyed by file stem."""
    out: dict[str, tuple[RuleAst, ...]] = {}
    root = resources.files("cbac") / "corpus"
    for name in CORPUS_ORDER:
        source = (root / f"{name}.drl").read_text(encoding="utf-8")
        out[name] = tuple(rulelang.parse_rules(source))
    return out


def corpus_rules(priority: str = PRIORITY_PERMISSIONS) -> list[RuleAst]:
    """The bundled rule set with the conflict variant the priority selects."""
    if priority not in (PRIORITY_PERMISSIONS, PRIORITY_PROHIBITIONS):
        raise CbacError(f"unknown priority {priority!r}")
    drop = "conflicts-remove-arca" if priority == PRIORITY_PERMISSIONS else "conflicts-remove-barca"
    rules: list[RuleAst] = []
    for name, parsed in load_corpus().items():
        if name != drop:
            rules.extend(parsed)
    return rules


def evaluate(policy: PolicyConfig,
             custom_facts: Sequence[CustomFactInstance] = (),
             priority: str = PRIORITY_PERMISSIONS,
             budget: int = 100_000,
             rules: Sequence[RuleAst] | None = None) -> EvaluationResult:
    """Run one fresh session over the policy and return the collected Pars
    plus a snapshot of the quiesced relations (for the oracle to replay)."""
    from .authz import BaseRelations  # local import: authz also drives this module

    session = Session(policy, corpus_rules(priority) if rules is None else rules, budget)
    session.seed(custom_facts)
    report = session.fire_until_quiescent()
    wm = session.working_memory()
    relations = BaseRelations(
        pcas=frozenset(f for f in wm if isinstance(f, Pca)),
        arcas=frozenset(f for f in wm if isinstance(f, Arca)),
        barcas=frozenset(f for f in wm if isinstance(f, Barca)),
        hierarchy=policy.hierarchy,
    )
    ordered = sorted(session.pars,
                     key=lambda p: (p.principal, p.permission.resource, p.permission.action,
                                    p.sign.value, p.chain))
    return EvaluationResult(tuple(ordered), relations, report)


def evaluate_scenario(policy: PolicyConfig,
                      entries: Sequence[tuple[str, list]] = (),
                      priority: str = PRIORITY_PERMISSIONS,
                      budget: int = 100_000) -> EvaluationResult:
    """evaluate() over raw (fact id, values) pairs, validating them first."""
    instances = validate_custom_fact_list(policy, list(entries))
    return evaluate(policy, instances, priority, budget)
