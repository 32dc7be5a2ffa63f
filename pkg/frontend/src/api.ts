// Thin typed client over the policy service. The fetch implementation is
// injectable so tests can stub the transport.

import type {
    CustomFactDecl,
    EntityDoc,
    ErrorEnvelope,
    OptionDoc,
    ParsRequest,
    ParsResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        public readonly envelope: ErrorEnvelope,
    ) {
        super(`${envelope.code}: ${envelope.message}`);
    }
}

export type EntityRoute = "sites" | "principals" | "categories" | "actions" | "resources";

export class ApiClient {
    constructor(
        private readonly baseUrl: string,
        private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
    ) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
        const text = await response.text();
        const payload = text ? JSON.parse(text) : null;
        if (!response.ok) {
            const envelope: ErrorEnvelope =
                payload && typeof payload.code === "string"
                    ? payload
                    : { code: "http_error", message: `HTTP ${response.status}`, details: null };
            throw new ApiError(response.status, envelope);
        }
        return payload as T;
    }

    listEntities(route: EntityRoute): Promise<EntityDoc[]> {
        return this.request(`/${route}`);
    }

    listCustomFacts(): Promise<CustomFactDecl[]> {
        return this.request("/customFacts");
    }

    listParamOptions(factId: string, rank: number): Promise<OptionDoc[]> {
        return this.request(`/customFacts/${encodeURIComponent(factId)}/params/${rank}/options`);
    }

    computePars(request: ParsRequest): Promise<ParsResponse> {
        return this.request("/pars", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(request),
        });
    }
}
