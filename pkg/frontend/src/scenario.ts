// Scenario state: the ordered list of custom facts the administrator has
// assembled, validated client-side against the /customFacts metadata
// before anything is submitted.

import type { CustomFactDecl, FactEntry, ParsRequest, ParsResponse, Priority } from "./types.js";

export interface ValidationIssue {
    rank: number | null;
    message: string;
}

export function validateEntry(
    decl: CustomFactDecl,
    values: (string | boolean | null)[],
    existing: FactEntry[],
): ValidationIssue | null {
    if (decl.single && existing.some((e) => e.factId === decl.fact)) {
        return { rank: null, message: `${decl.label || decl.fact} can only appear once per scenario` };
    }
    if (values.length !== decl.parameters.length) {
        return { rank: null, message: `expected ${decl.parameters.length} parameter value(s)` };
    }
    for (const param of decl.parameters) {
        const value = values[param.rank];
        if (param.type === "BOOLEAN") {
            if (typeof value !== "boolean") {
                return { rank: param.rank, message: `${param.label} must be on or off` };
            }
        } else if (typeof value !== "string" || value.length === 0) {
            const what = param.type === "SELECTION" ? "a selection" : "text";
            return { rank: param.rank, message: `${param.label} needs ${what}` };
        }
    }
    return null;
}

export class ScenarioState {
    entries: FactEntry[] = [];
    priority: Priority = "permissions";
    lastResponse: ParsResponse | null = null;
    pending = false;

    constructor(private readonly decls: CustomFactDecl[]) {}

    decl(factId: string): CustomFactDecl | undefined {
        return this.decls.find((d) => d.fact === factId);
    }

    /** Validate and append one fact entry; returns the blocking issue if any. */
    add(factId: string, values: (string | boolean | null)[]): ValidationIssue | null {
        const decl = this.decl(factId);
        if (!decl) {
            return { rank: null, message: `unknown fact ${factId}` };
        }
        const issue = validateEntry(decl, values, this.entries);
        if (issue) {
            return issue;
        }
        this.entries.push({ factId, values: values as (string | boolean)[] });
        return null;
    }

    removeAt(index: number): void {
        this.entries.splice(index, 1);
    }

    /** An empty scenario is a valid request: it renders the static policy. */
    toRequest(): ParsRequest {
        return {
            customFacts: this.entries.map((e) => ({ fact: e.factId, parameters: e.values })),
            priority: this.priority,
        };
    }
}
