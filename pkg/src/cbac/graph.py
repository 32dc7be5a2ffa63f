"""Typed policy graph built from a ParSet, plus node-link and DOT exports.

Nodes carry one of the four types P, C, A, R; edges one of PC, CC, CA, AR.
A grant shows up as a directed P->C->(C->)*->A->R path whose final AR edge
carries the grant sign; prohibitions share the picture with a deny-signed
AR edge. Edge direction is presentational (PC principal->category, CC
child->parent, CA category->action, AR action->resource); well-typedness
only looks at endpoint types.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .errors import CbacError
from .model import Answer, EntityRegistry, Par

NODE_TYPES = ("P", "C", "A", "R")
EDGE_TYPES = ("PC", "CC", "CA", "AR")

SIGN_NEUTRAL = "neutral"


@dataclass(frozen=True, slots=True)
class GraphNode:
    id: str
    label: str
    node_type: str


@dataclass(frozen=True, slots=True)
class GraphEdge:
    source: str
    target: str
    edge_type: str
    sign: str = SIGN_NEUTRAL


@dataclass(frozen=True)
class PolicyGraph:
    nodes: frozenset[GraphNode]
    edges: frozenset[GraphEdge]

    def sorted_nodes(self) -> list[GraphNode]:
        return sorted(self.nodes, key=lambda n: n.id)

    def sorted_edges(self) -> list[GraphEdge]:
        return sorted(self.edges, key=lambda e: (e.source, e.target, e.edge_type, e.sign))


def _node_id(node_type: str, entity_id: str) -> str:
    return f"{node_type}:{entity_id}"


def build_graph(pars: Iterable[Par], registry: EntityRegistry) -> PolicyGraph:
    """One merged graph over every Par: shared entities become shared nodes."""
    nodes: set[GraphNode] = set()
    edges: set[GraphEdge] = set()

    def add_node(node_type: str, entity_id: str, label: str) -> str:
        nid = _node_id(node_type, entity_id)
        nodes.add(GraphNode(nid, label or entity_id, node_type))
        return nid

    for par in pars:
        principal = registry.principal(par.principal)
        p_node = add_node("P", principal.id, principal.name)
        chain_nodes = [add_node("C", cid, registry.category(cid).name) for cid in par.chain]
        action = registry.action(par.permission.action)
        resource = registry.resource(par.permission.resource)
        a_node = add_node("A", action.id, action.name)
        r_node = add_node("R", resource.id, resource.name)

        edges.add(GraphEdge(p_node, chain_nodes[0], "PC"))
        for near, far in zip(chain_nodes, chain_nodes[1:]):
            if par.sign is Answer.GRANT:
                edges.add(GraphEdge(near, far, "CC"))  # chain ascends child -> parent
            else:
                edges.add(GraphEdge(far, near, "CC"))  # deny chains descend; CC stays child -> parent
        edges.add(GraphEdge(chain_nodes[-1], a_node, "CA"))
        edges.add(GraphEdge(a_node, r_node, "AR", par.sign.value))
    return PolicyGraph(frozenset(nodes), frozenset(edges))


def check_well_typed(graph: PolicyGraph) -> list[str]:
    """Empty list when well-typed, otherwise one message per violation."""
    violations: list[str] = []
    by_id: dict[str, GraphNode] = {}
    for node in graph.sorted_nodes():
        if node.node_type not in NODE_TYPES:
            violations.append(f"node {node.id} has unknown type {node.node_type!r}")
        if node.id in by_id:
            violations.append(f"duplicate node id {node.id}")
        by_id[node.id] = node
    for edge in graph.sorted_edges():
        where = f"edge {edge.source} -> {edge.target}"
        if edge.edge_type not in EDGE_TYPES:
            violations.append(f"{where} has forbidden type {edge.edge_type!r}")
            continue
        source = by_id.get(edge.source)
        target = by_id.get(edge.target)
        if source is None or target is None:
            violations.append(f"{where} references a missing node")
            continue
        if edge.source == edge.target:
            violations.append(f"{where} is a self-edge")
            continue
        # direction is presentational: type must match the endpoint pair either way round
        if {source.node_type, target.node_type} != set(edge.edge_type):
            violations.append(f"{where} typed {edge.edge_type} joins {source.node_type} and {target.node_type}")
    return violations


def has_grant_path(graph: PolicyGraph, par: Par) -> bool:
    """Is there a PC.CC*.CA.AR walk realizing this grant in the graph?"""
    if par.sign is not Answer.GRANT:
        raise CbacError("grant-path check applies to grant Pars only")
    p_node = _node_id("P", par.principal)
    a_node = _node_id("A", par.permission.action)
    r_node = _node_id("R", par.permission.resource)
    if not any(e.edge_type == "AR" and e.source == a_node and e.target == r_node and e.sign == "grant"
               for e in graph.edges):
        return False
    start = {e.target for e in graph.edges if e.edge_type == "PC" and e.source == p_node}
    reached = set(start)
    frontier = list(start)
    cc = [(e.source, e.target) for e in graph.edges if e.edge_type == "CC"]
    while frontier:
        here = frontier.pop()
        for src, dst in cc:
            if src == here and dst not in reached:
                reached.add(dst)
                frontier.append(dst)
    return any(e.edge_type == "CA" and e.source in reached and e.target == a_node for e in graph.edges)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def node_link_document(graph: PolicyGraph) -> dict:
    return {
        "nodes": [
            {"id": n.id, "label": n.label, "nodeType": n.node_type}
            for n in graph.sorted_nodes()
        ],
        "links": [
            {"source": e.source, "target": e.target, "edgeType": e.edge_type, "sign": e.sign}
            for e in graph.sorted_edges()
        ],
    }


_DOT_NODE_STYLE = {
    "P": 'shape=box, style=filled, fillcolor="#aec7e8"',
    "C": 'shape=ellipse, style=filled, fillcolor="#ffdd8a"',
    "A": 'shape=diamond, style=filled, fillcolor="#b5e7a0"',
    "R": 'shape=folder, style=filled, fillcolor="#d9d9d9"',
}


def _dot_edge_style(edge: GraphEdge) -> str:
    if edge.edge_type == "AR" and edge.sign == "deny":
        return 'color="#d62728", style=bold'
    if edge.edge_type == "AR" and edge.sign == "grant":
        return 'color="#2ca02c"'
    return 'color="#555555"'


def dot_document(graph: PolicyGraph) -> str:
    lines = ["digraph policy {", "  rankdir=LR;"]
    for node in graph.sorted_nodes():
        label = node.label.replace('"', '\\"')
        lines.append(f'  "{node.id}" [label="{label}", {_DOT_NODE_STYLE[node.node_type]}];')
    for edge in graph.sorted_edges():
        lines.append(f'  "{edge.source}" -> "{edge.target}" [{_dot_edge_style(edge)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(graph: PolicyGraph, format: str = "node-link") -> str:
    """Serialize a well-typed graph; deterministic byte-for-byte."""
    if format == "node-link":
        return json.dumps(node_link_document(graph), indent=2) + "\n"
    if format == "dot":
        return dot_document(graph)
    raise CbacError(f"unknown graph export format {format!r} (use node-link or dot)")
