// Pure render model: everything the SVG layer draws, derived from one
// /pars response plus the layout. Keeping this free of DOM code makes the
// node/edge counts and colors directly testable.

import { layoutGraph, DEFAULT_LAYOUT, type LayoutOptions, type Point } from "./layout.js";
import type { EdgeSign, NodeLinkDoc, NodeType, ParDoc, ParsResponse } from "./types.js";

export const NODE_COLORS: Record<NodeType, string> = {
    P: "#4e79a7", // principals: blue
    C: "#f1a226", // categories: amber
    A: "#59a14f", // actions: green
    R: "#b07aa1", // resources: mauve
};

export const EDGE_COLORS: Record<EdgeSign, string> = {
    grant: "#2f9e44",
    deny: "#e03131",
    neutral: "#8a8f98",
};

export const LEGEND = [
    { label: "Principal", color: NODE_COLORS.P },
    { label: "Category", color: NODE_COLORS.C },
    { label: "Action", color: NODE_COLORS.A },
    { label: "Resource", color: NODE_COLORS.R },
    { label: "Granted", color: EDGE_COLORS.grant },
    { label: "Denied", color: EDGE_COLORS.deny },
] as const;

export interface RenderNode {
    id: string;
    label: string;
    nodeType: NodeType;
    color: string;
    x: number;
    y: number;
}

export interface RenderEdge {
    key: string;
    source: Point;
    target: Point;
    color: string;
    sign: EdgeSign;
    edgeType: string;
}

export interface ViewModel {
    nodes: RenderNode[];
    edges: RenderEdge[];
    firedCount: number;
}

export function edgeKey(source: string, target: string, edgeType: string, sign: EdgeSign): string {
    return `${source}>${target}>${edgeType}>${sign}`;
}

export function buildViewModel(response: ParsResponse, layout: LayoutOptions = DEFAULT_LAYOUT): ViewModel {
    const positions = layoutGraph(response.graph, layout);
    const nodes = response.graph.nodes.map((n) => ({
        id: n.id,
        label: n.label,
        nodeType: n.nodeType,
        color: NODE_COLORS[n.nodeType],
        x: positions.get(n.id)?.x ?? 0,
        y: positions.get(n.id)?.y ?? 0,
    }));
    const edges = response.graph.links.map((l) => ({
        key: edgeKey(l.source, l.target, l.edgeType, l.sign),
        source: positions.get(l.source) ?? { x: 0, y: 0 },
        target: positions.get(l.target) ?? { x: 0, y: 0 },
        color: EDGE_COLORS[l.sign],
        sign: l.sign,
        edgeType: l.edgeType,
    }));
    return { nodes, edges, firedCount: response.stats.firedCount };
}

/** The node and edge ids that one Par's path touches in the graph. */
export function parPath(par: ParDoc): { nodeIds: string[]; edgeKeys: string[] } {
    const pNode = `P:${par.principal}`;
    const chainNodes = par.chain.map((c) => `C:${c}`);
    const aNode = `A:${par.permission.action}`;
    const rNode = `R:${par.permission.resource}`;
    const edgeKeys = [edgeKey(pNode, chainNodes[0]!, "PC", "neutral")];
    for (let i = 0; i + 1 < chainNodes.length; i += 1) {
        // grant chains ascend child->parent; deny chains list parent first,
        // so the child->parent CC edge runs against chain order
        if (par.sign === "grant") {
            edgeKeys.push(edgeKey(chainNodes[i]!, chainNodes[i + 1]!, "CC", "neutral"));
        } else {
            edgeKeys.push(edgeKey(chainNodes[i + 1]!, chainNodes[i]!, "CC", "neutral"));
        }
    }
    edgeKeys.push(edgeKey(chainNodes[chainNodes.length - 1]!, aNode, "CA", "neutral"));
    edgeKeys.push(edgeKey(aNode, rNode, "AR", par.sign));
    return { nodeIds: [pNode, ...chainNodes, aNode, rNode], edgeKeys };
}

/** Hover support: everything on any permission path through the node. */
export function highlightForNode(response: ParsResponse, nodeId: string): {
    nodeIds: Set<string>;
    edgeKeys: Set<string>;
} {
    const nodeIds = new Set<string>();
    const edgeKeys = new Set<string>();
    for (const par of response.pars) {
        const path = parPath(par);
        if (path.nodeIds.includes(nodeId)) {
            path.nodeIds.forEach((n) => nodeIds.add(n));
            path.edgeKeys.forEach((e) => edgeKeys.add(e));
        }
    }
    return { nodeIds, edgeKeys };
}

/** Sanity check used by tests and the integration probe: the rendered
 *  counts must equal the response document's array lengths. */
export function countsMatch(model: ViewModel, graph: NodeLinkDoc): boolean {
    return model.nodes.length === graph.nodes.length && model.edges.length === graph.links.length;
}
