export type LayoutKind = 'force' | 'tree' | 'layered' | 'star' | 'circle';

export const LAYOUTS: LayoutKind[] = ['force', 'tree', 'layered', 'star', 'circle'];

/** Client-side view state shared by the network tabs. */
export interface ViewState {
  activeTab: string;
  selected: string | null;
  evidence: Map<string, string>; // evidence chips: node -> level
  layout: LayoutKind;
  neighborDepth: number;         // 0 disables neighborhood filtering
  fontSize: number;
  colorGroups: Map<string, number>;
  shapeGroups: Map<string, number>;
}

export function initialViewState(): ViewState {
  return {
    activeTab: 'data',
    selected: null,
    evidence: new Map(),
    layout: 'force',
    neighborDepth: 0,
    fontSize: 11,
    colorGroups: new Map(),
    shapeGroups: new Map(),
  };
}

/** Nodes within `depth` undirected hops of `start` (inclusive). */
export function neighborhood(
  nodes: string[], arcs: [string, string][], start: string, depth: number,
): Set<string> {
  const adj = new Map<string, Set<string>>(nodes.map((n) => [n, new Set<string>()]));
  for (const [a, b] of arcs) {
    adj.get(a)?.add(b);
    adj.get(b)?.add(a);
  }
  const seen = new Set([start]);
  let frontier = [start];
  for (let d = 0; d < depth; d += 1) {
    const next: string[] = [];
    for (const v of frontier) {
      for (const w of adj.get(v) ?? []) {
        if (!seen.has(w)) {
          seen.add(w);
          next.push(w);
        }
      }
    }
    frontier = next;
  }
  return seen;
}
