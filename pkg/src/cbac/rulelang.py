"""Parser and printer for the production-rule language.

The language is deliberately small:

    rule "name"
      salience -100          // the only accepted attribute
      when
        $p : Principal($pid : id)
        $pca : Pca(principal.id == $pid, category.id == "clinician")
        not Barca(permission.action.id == "read")
        Arca(categories.containsOrEquals(category.id, $pid))
      then
        insert(new Pca($p, categories.getCategoryById("read_all")))
        delete($pca)
        pars.add(new Par($p, categories.getPermissionChain($pid, $pid), $pca))
      end

Patterns match working-memory facts; constraints are ==/!= field
comparisons, field bindings and the two hierarchy builtins. The right hand
side is restricted to the declarative actions insert/delete/pars.add
(`update(h, ctor)` is accepted and desugared to delete+insert). Any other
rule attribute is rejected explicitly rather than misparsed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import RuleSyntaxError, UnboundVariableError, UnknownFactKindError, UnsupportedAttributeError
from .model import Answer

MODEL_FACT_KINDS = ("Principal", "Category", "Action", "Resource", "Site", "Pca", "Arca", "Barca")
CTOR_KINDS = ("Pca", "Arca", "Barca", "Permission")

# rule attributes common in production-rule dialects, recognised only to
# reject them by name instead of misparsing
REJECTED_ATTRIBUTES = frozenset({
    "no-loop", "ruleflow-group", "lock-on-active", "dialect", "agenda-group",
    "auto-focus", "activation-group", "date-effective", "date-expires", "duration",
})


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Literal:
    value: bool | str


@dataclass(frozen=True, slots=True)
class FieldPath:
    """A dotted path on the pattern's own fact, e.g. permission.action.id"""

    path: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class VarRef:
    """A bound variable, optionally followed by a field path: $arca.category.id"""

    var: str
    path: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class CategoryLookup:
    """categories.getCategoryById("...") — registry lookup by literal id."""

    category_id: str


@dataclass(frozen=True, slots=True)
class PermissionCtor:
    """new Permission(action, resource)"""

    action: "Expr"
    resource: "Expr"


Operand = Literal | FieldPath | VarRef | CategoryLookup
Expr = Literal | VarRef | CategoryLookup | PermissionCtor


@dataclass(frozen=True, slots=True)
class FieldBinding:
    var: str
    path: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class Comparison:
    left: Operand
    op: str  # "==" or "!="
    right: Operand


@dataclass(frozen=True, slots=True)
class ContainsCheck:
    """categories.containsOrEquals(general, specific)"""

    general: Operand
    specific: Operand


Constraint = FieldBinding | Comparison | ContainsCheck


@dataclass(frozen=True, slots=True)
class Pattern:
    kind: str
    constraints: tuple[Constraint, ...] = ()
    binding: str | None = None
    negated: bool = False


@dataclass(frozen=True, slots=True)
class FactCtor:
    kind: str
    args: tuple[Expr, ...]


@dataclass(frozen=True, slots=True)
class InsertAction:
    ctor: FactCtor


@dataclass(frozen=True, slots=True)
class DeleteAction:
    var: str


@dataclass(frozen=True, slots=True)
class CollectParAction:
    """pars.add(new Par(principal, categories.get*Chain(start, end), permission))

    The chain function fixes the sign: an ascending permission chain collects
    a grant, a descending prohibition chain collects a deny.
    """

    principal: Expr
    chain_kind: str  # "permission" | "prohibition"
    chain_start: Expr
    chain_end: Expr
    permission: Expr

    @property
    def sign(self) -> Answer:
        return Answer.GRANT if self.chain_kind == "permission" else Answer.DENY


Action = InsertAction | DeleteAction | CollectParAction


@dataclass(frozen=True, slots=True)
class RuleAst:
    name: str
    salience: int = 0
    patterns: tuple[Pattern, ...] = ()
    actions: tuple[Action, ...] = ()

    @property
    def positive_patterns(self) -> tuple[Pattern, ...]:
        return tuple(p for p in self.patterns if not p.negated)

    @property
    def negated_patterns(self) -> tuple[Pattern, ...]:
        return tuple(p for p in self.patterns if p.negated)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r]+)
    | (?P<comment>//[^\n]*)
    | (?P<nl>\n)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<int>\d+)
    | (?P<var>\$[A-Za-z_][A-Za-z0-9_]*)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>==|!=)
    | (?P<punct>[().,:;\-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class _Token:
    type: str  # STRING INT VAR IDENT OP PUNCT EOF
    value: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise RuleSyntaxError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(text)
        else:
            tokens.append(_Token(kind.upper() if kind != "punct" else "PUNCT", text, line, col))
            col += len(text)
        pos = m.end()
    tokens.append(_Token("EOF", "", line, col))
    return tokens


def _unquote(raw: str) -> str:
    return raw[1:-1].replace('\\"', '"').replace("\\\\", "\\")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, known_kinds: frozenset[str] | None):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.known_kinds = known_kinds
        self.bound: list[str] = []  # vars bound so far in the current rule
        self.rule_name = ""

    # --- token helpers ---

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.type != "EOF":
            self.pos += 1
        return tok

    def fail(self, message: str, expected: tuple[str, ...] = ()) -> RuleSyntaxError:
        tok = self.peek()
        return RuleSyntaxError(f"{message}, found {tok.value!r}" if tok.value else f"{message}, found end of input",
                               tok.line, tok.column, expected)

    def expect(self, type_: str, value: str | None = None, expected: tuple[str, ...] = ()) -> _Token:
        tok = self.peek()
        if tok.type != type_ or (value is not None and tok.value != value):
            raise self.fail("unexpected token", expected or ((value,) if value else (type_.lower(),)))
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.type == "IDENT" and tok.value == word

    # --- grammar ---

    def parse_rules(self) -> list[RuleAst]:
        rules: list[RuleAst] = []
        names: set[str] = set()
        while not self.peek().type == "EOF":
            rule = self.parse_rule()
            if rule.name in names:
                raise RuleSyntaxError(f"duplicate rule name {rule.name!r}", self.peek().line, self.peek().column)
            names.add(rule.name)
            rules.append(rule)
        return rules

    def parse_rule(self) -> RuleAst:
        self.bound = []
        self.expect("IDENT", "rule", expected=("rule",))
        name_tok = self.expect("STRING", expected=("rule name string",))
        self.rule_name = _unquote(name_tok.value)
        if not self.rule_name:
            raise RuleSyntaxError("rule name must be non-empty", name_tok.line, name_tok.column)
        salience = self.parse_attributes()
        self.expect("IDENT", "when", expected=("when", "salience"))
        patterns: list[Pattern] = []
        while not self.at_keyword("then"):
            patterns.append(self.parse_pattern())
        self.expect("IDENT", "then", expected=("then",))
        actions: list[Action] = []
        while not self.at_keyword("end"):
            actions.extend(self.parse_action())
        self.expect("IDENT", "end", expected=("end",))
        return RuleAst(self.rule_name, salience, tuple(patterns), tuple(actions))

    def parse_attributes(self) -> int:
        salience = 0
        while not self.at_keyword("when"):
            tok = self.peek()
            if tok.type != "IDENT":
                raise self.fail("expected rule attribute or 'when'", ("when", "salience"))
            # attribute names may contain hyphens (no-loop, agenda-group, ...)
            parts = [self.advance().value]
            while self.peek().type == "PUNCT" and self.peek().value == "-" and self.peek(1).type == "IDENT":
                self.advance()
                parts.append(self.advance().value)
            attr = "-".join(parts)
            if attr == "salience":
                negative = False
                if self.peek().type == "PUNCT" and self.peek().value == "-":
                    self.advance()
                    negative = True
                value_tok = self.expect("INT", expected=("integer salience value",))
                salience = -int(value_tok.value) if negative else int(value_tok.value)
            elif attr in REJECTED_ATTRIBUTES:
                raise UnsupportedAttributeError(attr, tok.line, tok.column)
            else:
                raise RuleSyntaxError(f"unknown token {attr!r} before 'when'", tok.line, tok.column,
                                      ("when", "salience"))
        return salience

    def parse_pattern(self) -> Pattern:
        negated = False
        binding: str | None = None
        if self.at_keyword("not"):
            self.advance()
            negated = True
        elif self.peek().type == "VAR" and self.peek(1).value == ":":
            tok = self.peek()
            binding = self.advance().value
            if binding in self.bound:
                raise RuleSyntaxError(f"variable {binding} is already bound in rule {self.rule_name!r}",
                                      tok.line, tok.column)
            self.advance()  # ':'
        kind_tok = self.expect("IDENT", expected=("fact kind",))
        kind = kind_tok.value
        if self.known_kinds is not None and kind not in self.known_kinds:
            raise UnknownFactKindError(kind, f"rule {self.rule_name!r}")
        if binding is not None:
            self.bound.append(binding)
        self.expect("PUNCT", "(")
        constraints: list[Constraint] = []
        while not (self.peek().type == "PUNCT" and self.peek().value == ")"):
            constraints.append(self.parse_constraint(negated))
            if self.peek().type == "PUNCT" and self.peek().value == ",":
                self.advance()
        self.expect("PUNCT", ")")
        return Pattern(kind, tuple(constraints), binding, negated)

    def parse_constraint(self, negated: bool) -> Constraint:
        tok = self.peek()
        if tok.type == "VAR" and self.peek(1).value == ":":
            if negated:
                raise RuleSyntaxError("bindings are not allowed inside a negated pattern", tok.line, tok.column)
            var = self.advance().value
            if var in self.bound:
                raise RuleSyntaxError(f"variable {var} is already bound in rule {self.rule_name!r}",
                                      tok.line, tok.column)
            self.advance()  # ':'
            path = self.parse_dotted_path()
            self.bound.append(var)
            return FieldBinding(var, path)
        if tok.type == "IDENT" and tok.value == "categories" and self.peek(1).value == ".":
            call_name, args = self.parse_categories_call(in_constraint=True)
            if call_name == "containsOrEquals":
                return ContainsCheck(args[0], args[1])
            # getCategoryById resolved as an operand of a comparison
            return self.finish_comparison(CategoryLookup(args[0]))  # type: ignore[arg-type]
        left = self.parse_operand()
        return self.finish_comparison(left)

    def finish_comparison(self, left: Operand) -> Comparison:
        op_tok = self.peek()
        if op_tok.type != "OP":
            raise self.fail("expected comparison operator", ("==", "!="))
        self.advance()
        right = self.parse_operand()
        return Comparison(left, op_tok.value, right)

    def parse_dotted_path(self) -> tuple[str, ...]:
        segs = [self.expect("IDENT", expected=("field name",)).value]
        while self.peek().type == "PUNCT" and self.peek().value == ".":
            self.advance()
            segs.append(self.expect("IDENT", expected=("field name",)).value)
        return tuple(segs)

    def parse_categories_call(self, in_constraint: bool) -> tuple[str, tuple]:
        self.expect("IDENT", "categories")
        self.expect("PUNCT", ".")
        fn_tok = self.expect("IDENT", expected=("containsOrEquals", "getCategoryById"))
        if fn_tok.value == "getCategoryById":
            self.expect("PUNCT", "(")
            id_tok = self.expect("STRING", expected=("category id string",))
            self.expect("PUNCT", ")")
            return "getCategoryById", (_unquote(id_tok.value),)
        if fn_tok.value == "containsOrEquals" and in_constraint:
            self.expect("PUNCT", "(")
            a = self.parse_operand()
            self.expect("PUNCT", ",")
            b = self.parse_operand()
            self.expect("PUNCT", ")")
            return "containsOrEquals", (a, b)
        raise RuleSyntaxError(f"unsupported categories function {fn_tok.value!r}", fn_tok.line, fn_tok.column,
                              ("containsOrEquals", "getCategoryById"))

    def parse_operand(self) -> Operand:
        tok = self.peek()
        if tok.type == "VAR":
            self.advance()
            if tok.value not in self.bound:
                raise UnboundVariableError(tok.value, self.rule_name, tok.line, tok.column)
            path: tuple[str, ...] = ()
            if self.peek().type == "PUNCT" and self.peek().value == ".":
                self.advance()
                path = self.parse_dotted_path()
            return VarRef(tok.value, path)
        if tok.type == "STRING":
            self.advance()
            return Literal(_unquote(tok.value))
        if tok.type == "IDENT":
            if tok.value == "Boolean" and self.peek(1).value == ".":
                self.advance()
                self.advance()
                flag = self.expect("IDENT", expected=("TRUE", "FALSE"))
                if flag.value not in ("TRUE", "FALSE"):
                    raise RuleSyntaxError(f"unknown boolean literal Boolean.{flag.value}", flag.line, flag.column,
                                          ("TRUE", "FALSE"))
                return Literal(flag.value == "TRUE")
            if tok.value in ("true", "false"):
                self.advance()
                return Literal(tok.value == "true")
            if tok.value == "categories" and self.peek(1).value == ".":
                name, args = self.parse_categories_call(in_constraint=False)
                return CategoryLookup(args[0])
            self.advance()
            path = (tok.value,)
            while self.peek().type == "PUNCT" and self.peek().value == ".":
                self.advance()
                path = path + (self.expect("IDENT", expected=("field name",)).value,)
            return FieldPath(path)
        raise self.fail("expected an operand", ("field path", "variable", "literal"))

    # --- actions ---

    def parse_action(self) -> list[Action]:
        tok = self.peek()
        if tok.type != "IDENT":
            raise self.fail("expected an action", ("insert", "delete", "update", "pars.add", "end"))
        if tok.value == "insert":
            self.advance()
            self.expect("PUNCT", "(")
            ctor = self.parse_ctor(allow_permission=False)
            self.expect("PUNCT", ")")
            self.skip_semi()
            return [InsertAction(ctor)]
        if tok.value == "delete":
            self.advance()
            self.expect("PUNCT", "(")
            var = self.expect("VAR", expected=("bound variable",))
            self.check_bound(var)
            self.expect("PUNCT", ")")
            self.skip_semi()
            return [DeleteAction(var.value)]
        if tok.value == "update":
            # no in-place mutation over value facts: update(h, ctor) is delete+insert
            self.advance()
            self.expect("PUNCT", "(")
            var = self.expect("VAR", expected=("bound variable",))
            self.check_bound(var)
            self.expect("PUNCT", ",")
            ctor = self.parse_ctor(allow_permission=False)
            self.expect("PUNCT", ")")
            self.skip_semi()
            return [DeleteAction(var.value), InsertAction(ctor)]
        if tok.value == "pars":
            self.advance()
            self.expect("PUNCT", ".")
            self.expect("IDENT", "add")
            self.expect("PUNCT", "(")
            self.expect("IDENT", "new", expected=("new Par(...)",))
            par_tok = self.expect("IDENT", expected=("Par",))
            if par_tok.value != "Par":
                raise RuleSyntaxError("pars.add expects a Par constructor", par_tok.line, par_tok.column, ("Par",))
            self.expect("PUNCT", "(")
            principal = self.parse_expr()
            self.expect("PUNCT", ",")
            chain_kind, start, end = self.parse_chain_call()
            self.expect("PUNCT", ",")
            permission = self.parse_expr()
            self.expect("PUNCT", ")")
            self.expect("PUNCT", ")")
            self.skip_semi()
            return [CollectParAction(principal, chain_kind, start, end, permission)]
        raise self.fail(f"unknown action {tok.value!r}", ("insert", "delete", "update", "pars.add", "end"))

    def parse_chain_call(self) -> tuple[str, Expr, Expr]:
        self.expect("IDENT", "categories", expected=("categories.getPermissionChain", "categories.getProhibitionChain"))
        self.expect("PUNCT", ".")
        fn = self.expect("IDENT", expected=("getPermissionChain", "getProhibitionChain"))
        if fn.value not in ("getPermissionChain", "getProhibitionChain"):
            raise RuleSyntaxError(f"unknown chain function {fn.value!r}", fn.line, fn.column,
                                  ("getPermissionChain", "getProhibitionChain"))
        self.expect("PUNCT", "(")
        start = self.parse_expr()
        self.expect("PUNCT", ",")
        end = self.parse_expr()
        self.expect("PUNCT", ")")
        return ("permission" if fn.value == "getPermissionChain" else "prohibition", start, end)

    def parse_ctor(self, allow_permission: bool) -> FactCtor:
        self.expect("IDENT", "new", expected=("new",))
        kind_tok = self.expect("IDENT", expected=CTOR_KINDS)
        kind = kind_tok.value
        allowed = CTOR_KINDS if allow_permission else tuple(k for k in CTOR_KINDS if k != "Permission")
        if kind not in allowed:
            raise RuleSyntaxError(f"cannot construct facts of kind {kind!r}", kind_tok.line, kind_tok.column, allowed)
        self.expect("PUNCT", "(")
        args: list[Expr] = []
        while not (self.peek().type == "PUNCT" and self.peek().value == ")"):
            args.append(self.parse_expr())
            if self.peek().type == "PUNCT" and self.peek().value == ",":
                self.advance()
        self.expect("PUNCT", ")")
        return FactCtor(kind, tuple(args))

    def parse_expr(self) -> Expr:
        tok = self.peek()
        if tok.type == "IDENT" and tok.value == "new":
            ctor = self.parse_ctor(allow_permission=True)
            if ctor.kind != "Permission":
                raise RuleSyntaxError("only Permission constructors may nest inside another constructor",
                                      tok.line, tok.column)
            if len(ctor.args) != 2:
                raise RuleSyntaxError("new Permission(...) takes an action and a resource", tok.line, tok.column)
            return PermissionCtor(ctor.args[0], ctor.args[1])
        operand = self.parse_operand()
        if isinstance(operand, FieldPath):
            raise RuleSyntaxError(f"bare field path {'.'.join(operand.path)!r} has no fact to read from here",
                                  tok.line, tok.column)
        return operand

    def check_bound(self, tok: _Token) -> None:
        if tok.value not in self.bound:
            raise UnboundVariableError(tok.value, self.rule_name, tok.line, tok.column)

    def skip_semi(self) -> None:
        if self.peek().type == "PUNCT" and self.peek().value == ";":
            self.advance()


def parse_rules(source: str, known_kinds: Iterable[str] | None = None) -> list[RuleAst]:
    """Parse rule source into ASTs, in declaration order.

    When ``known_kinds`` is given, pattern fact kinds outside it are
    rejected; otherwise any kind name is accepted syntactically and checked
    later when the rules are bound to a session.
    """
    kinds = None
    if known_kinds is not None:
        kinds = frozenset(known_kinds) | frozenset(MODEL_FACT_KINDS)
    return _Parser(source, kinds).parse_rules()


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

def _print_operand(op: Operand | Expr) -> str:
    if isinstance(op, Literal):
        if isinstance(op.value, bool):
            return "Boolean.TRUE" if op.value else "Boolean.FALSE"
        return _quote(op.value)
    if isinstance(op, FieldPath):
        return ".".join(op.path)
    if isinstance(op, VarRef):
        return op.var if not op.path else op.var + "." + ".".join(op.path)
    if isinstance(op, CategoryLookup):
        return f'categories.getCategoryById({_quote(op.category_id)})'
    if isinstance(op, PermissionCtor):
        return f"new Permission({_print_operand(op.action)}, {_print_operand(op.resource)})"
    raise TypeError(f"unprintable operand {op!r}")


def _print_constraint(c: Constraint) -> str:
    if isinstance(c, FieldBinding):
        return f"{c.var} : {'.'.join(c.path)}"
    if isinstance(c, Comparison):
        return f"{_print_operand(c.left)} {c.op} {_print_operand(c.right)}"
    if isinstance(c, ContainsCheck):
        return f"categories.containsOrEquals({_print_operand(c.general)}, {_print_operand(c.specific)})"
    raise TypeError(f"unprintable constraint {c!r}")


def _print_pattern(p: Pattern) -> str:
    head = "not " if p.negated else (f"{p.binding} : " if p.binding else "")
    return f"{head}{p.kind}({', '.join(_print_constraint(c) for c in p.constraints)})"


def _print_action(a: Action) -> str:
    if isinstance(a, InsertAction):
        args = ", ".join(_print_operand(x) for x in a.ctor.args)
        return f"insert(new {a.ctor.kind}({args}))"
    if isinstance(a, DeleteAction):
        return f"delete({a.var})"
    if isinstance(a, CollectParAction):
        fn = "getPermissionChain" if a.chain_kind == "permission" else "getProhibitionChain"
        chain = f"categories.{fn}({_print_operand(a.chain_start)}, {_print_operand(a.chain_end)})"
        return f"pars.add(new Par({_print_operand(a.principal)}, {chain}, {_print_operand(a.permission)}))"
    raise TypeError(f"unprintable action {a!r}")


def print_rules(rules: Iterable[RuleAst]) -> str:
    """Render ASTs back to canonical rule text; parse(print(r)) == r."""
    chunks: list[str] = []
    for rule in rules:
        lines = [f'rule {_quote(rule.name)}']
        if rule.salience != 0:
            lines.append(f"  salience {rule.salience}")
        lines.append("  when")
        lines.extend(f"    {_print_pattern(p)}" for p in rule.patterns)
        lines.append("  then")
        lines.extend(f"    {_print_action(a)}" for a in rule.actions)
        lines.append("end")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")
