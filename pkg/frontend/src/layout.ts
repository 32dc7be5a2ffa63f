// Seeded force-directed layout. Deterministic: the same graph and seed
// always land on the same coordinates, so re-running a scenario renders
// identical pictures (and screenshots stay reproducible).

import type { NodeLinkDoc } from "./types.js";

export interface Point {
    x: number;
    y: number;
}

export interface LayoutOptions {
    width: number;
    height: number;
    seed: number;
    iterations: number;
}

export const DEFAULT_LAYOUT: LayoutOptions = { width: 900, height: 600, seed: 42, iterations: 220 };

/** mulberry32: small deterministic PRNG, good enough for jittering layouts. */
export function mulberry32(seed: number): () => number {
    let state = seed >>> 0;
    return () => {
        state = (state + 0x6d2b79f5) >>> 0;
        let t = state;
        t = Math.imul(t ^ (t >>> 15), t | 1);
        t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
}

export function layoutGraph(graph: NodeLinkDoc, options: LayoutOptions = DEFAULT_LAYOUT): Map<string, Point> {
    const { width, height, seed, iterations } = options;
    const ids = graph.nodes.map((n) => n.id).sort();
    const random = mulberry32(seed);
    const positions = new Map<string, Point>();
    for (const id of ids) {
        positions.set(id, {
            x: width * (0.15 + 0.7 * random()),
            y: height * (0.15 + 0.7 * random()),
        });
    }
    if (ids.length <= 1) {
        return positions;
    }

    const area = width * height;
    const k = Math.sqrt(area / ids.length) * 0.7;
    // sorted so document order cannot perturb float summation
    const links = graph.links
        .map((l) => [l.source, l.target] as const)
        .filter(([a, b]) => positions.has(a) && positions.has(b))
        .sort((a, b) => (a[0] + ">" + a[1]).localeCompare(b[0] + ">" + b[1]));

    for (let step = 0; step < iterations; step += 1) {
        const temperature = 0.1 * Math.min(width, height) * (1 - step / iterations) + 1;
        const force = new Map<string, Point>(ids.map((id) => [id, { x: 0, y: 0 }]));

        for (let i = 0; i < ids.length; i += 1) {
            for (let j = i + 1; j < ids.length; j += 1) {
                const a = positions.get(ids[i]!)!;
                const b = positions.get(ids[j]!)!;
                let dx = a.x - b.x;
                let dy = a.y - b.y;
                let dist = Math.hypot(dx, dy);
                if (dist < 0.01) {
                    // deterministic unstick for coincident points
                    dx = 0.01 * (i - j);
                    dy = 0.01;
                    dist = Math.hypot(dx, dy);
                }
                const repulsion = (k * k) / dist;
                const fa = force.get(ids[i]!)!;
                const fb = force.get(ids[j]!)!;
                fa.x += (dx / dist) * repulsion;
                fa.y += (dy / dist) * repulsion;
                fb.x -= (dx / dist) * repulsion;
                fb.y -= (dy / dist) * repulsion;
            }
        }
        for (const [sourceId, targetId] of links) {
            const a = positions.get(sourceId)!;
            const b = positions.get(targetId)!;
            const dx = a.x - b.x;
            const dy = a.y - b.y;
            const dist = Math.max(Math.hypot(dx, dy), 0.01);
            const attraction = (dist * dist) / k;
            const fa = force.get(sourceId)!;
            const fb = force.get(targetId)!;
            fa.x -= (dx / dist) * attraction;
            fa.y -= (dy / dist) * attraction;
            fb.x += (dx / dist) * attraction;
            fb.y += (dy / dist) * attraction;
        }
        for (const id of ids) {
            const p = positions.get(id)!;
            const f = force.get(id)!;
            const magnitude = Math.max(Math.hypot(f.x, f.y), 0.01);
            const limited = Math.min(magnitude, temperature);
            p.x += (f.x / magnitude) * limited;
            p.y += (f.y / magnitude) * limited;
            p.x = Math.min(width - 30, Math.max(30, p.x));
            p.y = Math.min(height - 30, Math.max(30, p.y));
        }
    }
    return positions;
}
