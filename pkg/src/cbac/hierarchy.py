"""Category hierarchy: the subset order between categories.

Edges are (child, parent) pairs where the parent is the more general
category. Multiple parents are allowed (the order is a DAG, not a tree);
cycles are a load-time error. Ancestry closures are precomputed at
construction so the per-query operations the rule engine leans on are
dictionary lookups.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CbacError, NoPathError, UnknownIdError


def check_acyclic(edges: set[tuple[str, str]]) -> list[str] | None:
    """Return None if the (child, parent) edge set has no directed cycle,
    otherwise one cycle as an id sequence ending where it started."""
    children: dict[str, list[str]] = {}
    for child, parent in edges:
        children.setdefault(child, []).append(parent)
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict[str, int] = {}
    stack_path: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = GREY
        stack_path.append(node)
        for nxt in sorted(children.get(node, ())):
            state = color.get(nxt, WHITE)
            if state == GREY:
                idx = stack_path.index(nxt)
                return stack_path[idx:] + [nxt]
            if state == WHITE:
                cycle = visit(nxt)
                if cycle is not None:
                    return cycle
        stack_path.pop()
        color[node] = BLACK
        return None

    for start in sorted({c for c, _ in edges} | {p for _, p in edges}):
        if color.get(start, WHITE) == WHITE:
            cycle = visit(start)
            if cycle is not None:
                return cycle
    return None


@dataclass(frozen=True)
class CategoryHierarchy:
    """The subset relation over registered category ids, closed for queries."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]
    _parents: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False, compare=False)
    _ancestors: dict[str, frozenset[str]] = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def build(cls, category_ids: set[str], edges: set[tuple[str, str]]) -> "CategoryHierarchy":
        issues = []
        for child, parent in sorted(edges):
            if child == parent:
                issues.append(f"self-edge on category {child!r}")
            for end in (child, parent):
                if end not in category_ids:
                    issues.append(f"hierarchy edge references unregistered category {end!r}")
        cycle = check_acyclic(edges)
        if cycle is not None:
            issues.append("hierarchy contains a cycle: " + " -> ".join(cycle))
        if issues:
            raise CbacError("; ".join(issues))

        parents: dict[str, tuple[str, ...]] = {}
        for child, parent in sorted(edges):
            parents[child] = parents.get(child, ()) + (parent,)

        # ancestors-or-self, memoized bottom-up (safe: acyclicity just checked)
        ancestors: dict[str, frozenset[str]] = {}

        def close(node: str) -> frozenset[str]:
            if node in ancestors:
                return ancestors[node]
            acc = {node}
            for parent in parents.get(node, ()):
                acc |= close(parent)
            ancestors[node] = frozenset(acc)
            return ancestors[node]

        for node in category_ids:
            close(node)
        return cls(frozenset(category_ids), frozenset(edges), parents, ancestors)

    def _require(self, category_id: str) -> None:
        if category_id not in self.nodes:
            raise UnknownIdError("category", category_id)

    def ancestors_or_self(self, category_id: str) -> frozenset[str]:
        self._require(category_id)
        return self._ancestors[category_id]

    def contains_or_equals(self, a: str, b: str) -> bool:
        """True iff a == b or a is an ancestor of b, i.e. a is the more general."""
        self._require(a)
        return a in self.ancestors_or_self(b)

    def permission_chain(self, start: str, end: str) -> tuple[str, ...]:
        """Ascending path [start, ..., end] along child->parent edges.

        ``end`` must be an ancestor of (or equal to) ``start``. On diamonds
        the shortest path wins, tie-broken by lexicographically least id
        sequence, so results are deterministic.
        """
        self._require(start)
        self._require(end)
        if not self.contains_or_equals(end, start):
            raise NoPathError(start, end, "ascending")
        return self._best_path(start, end)

    def prohibition_chain(self, start: str, end: str) -> tuple[str, ...]:
        """Descending path [start, ..., end] from the more general ``start``
        down to ``end``; the reverse of the ascending path."""
        self._require(start)
        self._require(end)
        if not self.contains_or_equals(start, end):
            raise NoPathError(start, end, "descending")
        return tuple(reversed(self._best_path(end, start)))

    def _best_path(self, start: str, end: str) -> tuple[str, ...]:
        # BFS by depth; among minimal-length paths keep the lexicographically
        # least id sequence. Hierarchies are desk-scale, so no caching needed.
        if start == end:
            return (start,)
        frontier: list[tuple[str, ...]] = [(start,)]
        while frontier:
            nxt: list[tuple[str, ...]] = []
            done: list[tuple[str, ...]] = []
            for path in frontier:
                for parent in self._parents.get(path[-1], ()):
                    if parent in path:
                        continue
                    extended = path + (parent,)
                    (done if parent == end else nxt).append(extended)
            if done:
                return min(done)
            frontier = nxt
        raise NoPathError(start, end, "ascending")
