"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CbacError(Exception):
    """Base class for all errors raised by this package."""


class UnknownIdError(CbacError):
    """An entity id does not resolve in its registry."""

    def __init__(self, kind: str, entity_id: str):
        super().__init__(f"unknown {kind} id: {entity_id!r}")
        self.kind = kind
        self.entity_id = entity_id


class ConfigError(CbacError):
    """Policy directory failed to load. Carries every issue found, not just the first."""

    def __init__(self, issues: list[str]):
        super().__init__("policy configuration invalid:\n" + "\n".join(f"  - {i}" for i in issues))
        self.issues = list(issues)


class CustomFactError(CbacError):
    """A custom fact value list does not match its declaration."""


class RuleSyntaxError(CbacError):
    """Rule source failed to parse. Knows where and what was expected."""

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        loc = f"line {line}, column {column}"
        if expected:
            message = f"{message} (expected one of: {', '.join(expected)})"
        super().__init__(f"{loc}: {message}")
        self.line = line
        self.column = column
        self.expected = expected


class UnsupportedAttributeError(RuleSyntaxError):
    """A rule attribute outside the supported subset (only `salience` is accepted)."""

    def __init__(self, attribute: str, line: int, column: int):
        super().__init__(f"unsupported rule attribute {attribute!r}; only 'salience' is accepted", line, column)
        self.attribute = attribute


class UnboundVariableError(RuleSyntaxError):
    def __init__(self, var: str, rule_name: str, line: int, column: int):
        super().__init__(f"variable {var} used before binding in rule {rule_name!r}", line, column)
        self.var = var


class UnknownFactKindError(CbacError):
    """A pattern or constructor names a fact kind the session does not know."""

    def __init__(self, kind: str, context: str = ""):
        suffix = f" in {context}" if context else ""
        super().__init__(f"unknown fact kind {kind!r}{suffix}")
        self.kind = kind


class NoPathError(CbacError):
    """No hierarchy path exists between two categories in the requested direction."""

    def __init__(self, start: str, end: str, direction: str):
        super().__init__(f"no {direction} path from {start!r} to {end!r}")
        self.start = start
        self.end = end


class BudgetExhaustedError(CbacError):
    """The firing loop hit its iteration budget; reports the tail of the trace."""

    def __init__(self, budget: int, recent_rules: list[str]):
        tail = " -> ".join(recent_rules) if recent_rules else "(none)"
        super().__init__(f"rule firing budget of {budget} exhausted; last fired: {tail}")
        self.budget = budget
        self.recent_rules = list(recent_rules)
