// Browser entry point: wires the scenario builder and the SVG graph view
// to the policy service. All rendering derives from buildViewModel, so the
// picture on screen is exactly what the tests assert on.

import { ApiClient, ApiError } from "./api.js";
import { ScenarioState } from "./scenario.js";
import type { CustomFactDecl, ParameterDecl, ParsResponse, Priority } from "./types.js";
import { buildViewModel, highlightForNode, LEGEND, type ViewModel } from "./view.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    text = "",
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
        node.setAttribute(key, value);
    }
    if (text) {
        node.textContent = text;
    }
    return node;
}

function toast(message: string): void {
    const box = document.getElementById("toast")!;
    box.textContent = message;
    box.classList.add("visible");
    window.setTimeout(() => box.classList.remove("visible"), 6000);
}

class Console {
    private api: ApiClient;
    private scenario: ScenarioState = new ScenarioState([]);
    private decls: CustomFactDecl[] = [];
    private paramInputs: (() => string | boolean | null)[] = [];

    constructor(baseUrl: string) {
        this.api = new ApiClient(baseUrl);
    }

    async start(): Promise<void> {
        this.decls = await this.api.listCustomFacts();
        this.scenario = new ScenarioState(this.decls);
        this.renderFactPicker();
        this.renderLegend();
        this.renderEntries();
        document.getElementById("update")!.addEventListener("click", () => void this.update());
        document.getElementById("priority")!.addEventListener("change", (event) => {
            this.scenario.priority = (event.target as HTMLSelectElement).value as Priority;
        });
        await this.update(); // static policy view on load
    }

    private renderFactPicker(): void {
        const picker = document.getElementById("fact-picker") as HTMLSelectElement;
        picker.replaceChildren(el("option", { value: "" }, "choose a custom fact..."));
        for (const decl of this.decls) {
            picker.append(el("option", { value: decl.fact }, decl.label || decl.fact));
        }
        picker.addEventListener("change", () => void this.renderParamForm(picker.value));
        document.getElementById("add-fact")!.addEventListener("click", () => {
            void this.addEntry(picker.value);
        });
    }

    private async renderParamForm(factId: string): Promise<void> {
        const form = document.getElementById("param-form")!;
        form.replaceChildren();
        this.paramInputs = [];
        const decl = this.decls.find((d) => d.fact === factId);
        if (!decl) {
            return;
        }
        const note = el("p", { class: "hint" }, decl.description);
        form.append(note);
        for (const param of decl.parameters) {
            form.append(await this.paramControl(decl, param));
        }
    }

    private async paramControl(decl: CustomFactDecl, param: ParameterDecl): Promise<HTMLElement> {
        const wrapper = el("label", { class: "param" });
        wrapper.append(el("span", {}, param.label));
        if (param.type === "BOOLEAN") {
            const box = el("input", { type: "checkbox" });
            wrapper.append(box);
            this.paramInputs[param.rank] = () => box.checked;
        } else if (param.type === "SELECTION") {
            const select = el("select");
            select.append(el("option", { value: "" }, "--"));
            const options = await this.api.listParamOptions(decl.fact, param.rank);
            for (const option of options) {
                select.append(el("option", { value: option.id }, option.label));
            }
            wrapper.append(select);
            this.paramInputs[param.rank] = () => select.value || null;
        } else {
            const input = el("input", { type: "text" });
            wrapper.append(input);
            this.paramInputs[param.rank] = () => input.value;
        }
        return wrapper;
    }

    private async addEntry(factId: string): Promise<void> {
        if (!factId) {
            this.showValidation("pick a fact first");
            return;
        }
        const values = this.paramInputs.map((read) => read());
        const issue = this.scenario.add(factId, values);
        if (issue) {
            this.showValidation(issue.message);
            return;
        }
        this.showValidation("");
        this.renderEntries();
    }

    private showValidation(message: string): void {
        document.getElementById("validation")!.textContent = message;
    }

    private renderEntries(): void {
        const list = document.getElementById("entries")!;
        list.replaceChildren();
        this.scenario.entries.forEach((entry, index) => {
            const decl = this.scenario.decl(entry.factId);
            const item = el("li", {});
            item.append(el("span", {}, `${decl?.label ?? entry.factId}(${entry.values.join(", ")})`));
            const remove = el("button", { type: "button" }, "remove");
            remove.addEventListener("click", () => {
                this.scenario.removeAt(index);
                this.renderEntries();
            });
            item.append(remove);
            list.append(item);
        });
        const empty = el("li", { class: "hint" }, "empty scenario: static policy");
        if (!this.scenario.entries.length) {
            list.append(empty);
        }
    }

    private async update(): Promise<void> {
        if (this.scenario.pending) {
            return; // one in-flight request at a time
        }
        const button = document.getElementById("update") as HTMLButtonElement;
        this.scenario.pending = true;
        button.disabled = true;
        try {
            const response = await this.api.computePars(this.scenario.toRequest());
            this.scenario.lastResponse = response;
            this.renderGraph(response);
            document.getElementById("stats")!.textContent =
                `${response.pars.length} pars, ${response.graph.nodes.length} nodes, ` +
                `${response.graph.links.length} links, ${response.stats.firedCount} rule firings`;
        } catch (error) {
            if (error instanceof ApiError) {
                toast(`${error.envelope.code}: ${error.envelope.message}`);
            } else {
                toast(String(error));
            }
        } finally {
            this.scenario.pending = false;
            button.disabled = false;
        }
    }

    private renderLegend(): void {
        const legend = document.getElementById("legend")!;
        legend.replaceChildren();
        for (const item of LEGEND) {
            const entry = el("span", { class: "legend-entry" });
            const swatch = el("i", { class: "swatch" });
            swatch.style.background = item.color;
            entry.append(swatch, document.createTextNode(item.label));
            legend.append(entry);
        }
    }

    private renderGraph(response: ParsResponse): void {
        const model = buildViewModel(response);
        const svg = document.getElementById("graph")!;
        svg.replaceChildren();
        const edgeElements = new Map<string, SVGLineElement>();
        const nodeElements = new Map<string, SVGGElement>();

        for (const edge of model.edges) {
            const line = document.createElementNS(SVG_NS, "line");
            line.setAttribute("x1", String(edge.source.x));
            line.setAttribute("y1", String(edge.source.y));
            line.setAttribute("x2", String(edge.target.x));
            line.setAttribute("y2", String(edge.target.y));
            line.setAttribute("stroke", edge.color);
            line.setAttribute("stroke-width", edge.edgeType === "AR" ? "2.5" : "1.5");
            line.dataset.key = edge.key;
            svg.append(line);
            edgeElements.set(edge.key, line);
        }
        for (const node of model.nodes) {
            const group = document.createElementNS(SVG_NS, "g");
            const circle = document.createElementNS(SVG_NS, "circle");
            circle.setAttribute("cx", String(node.x));
            circle.setAttribute("cy", String(node.y));
            circle.setAttribute("r", "9");
            circle.setAttribute("fill", node.color);
            const label = document.createElementNS(SVG_NS, "text");
            label.setAttribute("x", String(node.x + 12));
            label.setAttribute("y", String(node.y + 4));
            label.textContent = node.label;
            group.append(circle, label);
            group.addEventListener("mouseenter", () => this.applyHighlight(response, node.id, model, edgeElements, nodeElements));
            group.addEventListener("mouseleave", () => this.applyHighlight(response, null, model, edgeElements, nodeElements));
            svg.append(group);
            nodeElements.set(node.id, group);
        }
    }

    private applyHighlight(
        response: ParsResponse,
        nodeId: string | null,
        model: ViewModel,
        edgeElements: Map<string, SVGLineElement>,
        nodeElements: Map<string, SVGGElement>,
    ): void {
        if (nodeId === null) {
            for (const line of edgeElements.values()) {
                line.setAttribute("opacity", "1");
            }
            for (const group of nodeElements.values()) {
                group.setAttribute("opacity", "1");
            }
            return;
        }
        const { nodeIds, edgeKeys } = highlightForNode(response, nodeId);
        for (const edge of model.edges) {
            edgeElements.get(edge.key)?.setAttribute("opacity", edgeKeys.has(edge.key) ? "1" : "0.15");
        }
        for (const node of model.nodes) {
            nodeElements.get(node.id)?.setAttribute("opacity", nodeIds.has(node.id) ? "1" : "0.25");
        }
    }
}

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? "http://127.0.0.1:8000";
void new Console(serviceUrl).start().catch((error) => toast(String(error)));
