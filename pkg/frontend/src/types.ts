// Wire types for the policy service API.

export interface EntityDoc {
    id: string;
    name: string;
    title?: string;
}

export type ParameterType = "SELECTION" | "BOOLEAN" | "TEXT";

export interface ParameterDecl {
    type: ParameterType;
    rank: number;
    label: string;
    description: string;
    optionType?: string;
}

export interface CustomFactDecl {
    fact: string;
    description: string;
    label: string;
    single: boolean;
    parameters: ParameterDecl[];
}

export interface OptionDoc {
    id: string;
    label: string;
}

export type Sign = "grant" | "deny";
export type EdgeSign = Sign | "neutral";

export interface ParDoc {
    principal: string;
    chain: string[];
    permission: { action: string; resource: string };
    sign: Sign;
}

export type NodeType = "P" | "C" | "A" | "R";
export type EdgeType = "PC" | "CC" | "CA" | "AR";

export interface GraphNodeDoc {
    id: string;
    label: string;
    nodeType: NodeType;
}

export interface GraphLinkDoc {
    source: string;
    target: string;
    edgeType: EdgeType;
    sign: EdgeSign;
}

export interface NodeLinkDoc {
    nodes: GraphNodeDoc[];
    links: GraphLinkDoc[];
}

export interface ParsResponse {
    pars: ParDoc[];
    graph: NodeLinkDoc;
    stats: { firedCount: number };
}

export type Priority = "permissions" | "prohibitions";

export interface FactEntry {
    factId: string;
    values: (string | boolean)[];
}

export interface ParsRequest {
    customFacts: { fact: string; parameters: (string | boolean)[] }[];
    priority: Priority;
}

export interface ErrorEnvelope {
    code: string;
    message: string;
    details: unknown;
}
