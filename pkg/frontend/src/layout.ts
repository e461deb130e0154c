/** Deterministic layered layout for small statecharts.
 *
 * Layers are breadth-first distance from the initial state; unreachable
 * states and the final pseudo-state sink to later layers. Within a layer
 * the service's state order is kept, so the same diagram always produces
 * the same coordinates.
 */
import type { DiagramView } from "./types.js";

export interface PlacedState {
  name: string;
  x: number;
  y: number;
  isInitial: boolean;
  isFinal: boolean;
}

export interface PlacedEdge {
  source: string;
  target: string;
  label: string;
  declIndex: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  labelX: number;
  labelY: number;
  selfLoop: boolean;
}

export interface Layout {
  states: PlacedState[];
  edges: PlacedEdge[];
  width: number;
  height: number;
}

const COLUMN = 190;
const ROW = 110;
const MARGIN_X = 90;
const MARGIN_Y = 60;
export const NODE_RADIUS = 34;

export function layerAssignment(diagram: DiagramView): Map<string, number> {
  const adjacency = new Map<string, string[]>();
  for (const t of diagram.transitions) {
    const out = adjacency.get(t.source) ?? [];
    out.push(t.target);
    adjacency.set(t.source, out);
  }
  const layers = new Map<string, number>();
  const initial = diagram.states.find((s) => s.is_initial);
  const queue: string[] = [];
  if (initial !== undefined) {
    layers.set(initial.name, 0);
    queue.push(initial.name);
  }
  while (queue.length > 0) {
    const current = queue.shift()!;
    const depth = layers.get(current)!;
    for (const next of adjacency.get(current) ?? []) {
      if (!layers.has(next)) {
        layers.set(next, depth + 1);
        queue.push(next);
      }
    }
  }
  const deepest = Math.max(0, ...layers.values());
  for (const s of diagram.states) {
    if (!layers.has(s.name)) {
      // unreachable: park after everything reachable
      layers.set(s.name, deepest + 1);
    }
  }
  return layers;
}

export function computeLayout(diagram: DiagramView): Layout {
  const layers = layerAssignment(diagram);
  const byLayer = new Map<number, string[]>();
  for (const s of diagram.states) {
    const layer = layers.get(s.name)!;
    const bucket = byLayer.get(layer) ?? [];
    bucket.push(s.name);
    byLayer.set(layer, bucket);
  }

  const position = new Map<string, { x: number; y: number }>();
  for (const [layer, names] of byLayer) {
    names.forEach((name, row) => {
      position.set(name, {
        x: MARGIN_X + layer * COLUMN,
        y: MARGIN_Y + row * ROW,
      });
    });
  }

  const states: PlacedState[] = diagram.states.map((s) => ({
    name: s.name,
    x: position.get(s.name)!.x,
    y: position.get(s.name)!.y,
    isInitial: s.is_initial,
    isFinal: s.is_final,
  }));

  const edges: PlacedEdge[] = diagram.transitions.map((t) => {
    const from = position.get(t.source)!;
    const to = position.get(t.target)!;
    const selfLoop = t.source === t.target;
    return {
      source: t.source,
      target: t.target,
      label: t.label,
      declIndex: t.decl_index,
      x1: from.x,
      y1: from.y,
      x2: to.x,
      y2: to.y,
      labelX: (from.x + to.x) / 2,
      labelY: (from.y + to.y) / 2 - 10,
      selfLoop,
    };
  });

  const width = Math.max(...states.map((s) => s.x), MARGIN_X) + MARGIN_X;
  const height = Math.max(...states.map((s) => s.y), MARGIN_Y) + MARGIN_Y;
  return { states, edges, width, height };
}
