import type { LayoutKind } from './state.js';

export interface Point { x: number; y: number }
export type Positions = Map<string, Point>;

const W = 960;
const H = 600;

/** Longest-path layer assignment (also used by the tree layout's ranks). */
function layerOf(nodes: string[], arcs: [string, string][]): Map<string, number> {
  const depth = new Map(nodes.map((n) => [n, 0]));
  for (let pass = 0; pass <= nodes.length; pass += 1) {
    let changed = false;
    for (const [a, b] of arcs) {
      const want = (depth.get(a) ?? 0) + 1;
      if ((depth.get(b) ?? 0) < want) {
        depth.set(b, want);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return depth;
}

function rankLayout(nodes: string[], arcs: [string, string][], spread: number): Positions {
  const depth = layerOf(nodes, arcs);
  const layers = new Map<number, string[]>();
  for (const n of nodes) {
    const d = depth.get(n) ?? 0;
    if (!layers.has(d)) layers.set(d, []);
    layers.get(d)!.push(n);
  }
  const maxDepth = Math.max(0, ...layers.keys());
  const pos: Positions = new Map();
  for (const [d, members] of layers) {
    members.forEach((n, i) => {
      pos.set(n, {
        x: ((i + 1) * W) / (members.length + 1),
        y: 40 + (maxDepth === 0 ? H / 2 : (d * (H - 80)) / Math.max(maxDepth, 1)) * spread,
      });
    });
  }
  return pos;
}

function circleLayout(nodes: string[]): Positions {
  const pos: Positions = new Map();
  const r = Math.min(W, H) / 2 - 60;
  nodes.forEach((n, i) => {
    const a = (2 * Math.PI * i) / Math.max(nodes.length, 1);
    pos.set(n, { x: W / 2 + r * Math.cos(a), y: H / 2 + r * Math.sin(a) });
  });
  return pos;
}

function starLayout(nodes: string[], center?: string | null): Positions {
  if (nodes.length === 0) return new Map();
  const hub = center && nodes.includes(center) ? center : nodes[0];
  const rest = nodes.filter((n) => n !== hub);
  const pos = circleLayout(rest);
  pos.set(hub, { x: W / 2, y: H / 2 });
  return pos;
}

/** Deterministic force-directed layout: seeded circular start plus a fixed
 * number of spring/repulsion rounds, no randomness. */
function forceLayout(nodes: string[], arcs: [string, string][]): Positions {
  const pos = circleLayout(nodes);
  const vel = new Map(nodes.map((n) => [n, { x: 0, y: 0 }]));
  const k = Math.sqrt((W * H) / Math.max(nodes.length, 1)) * 0.7;
  for (let round = 0; round < 150; round += 1) {
    const disp = new Map(nodes.map((n) => [n, { x: 0, y: 0 }]));
    for (let i = 0; i < nodes.length; i += 1) {
      for (let j = i + 1; j < nodes.length; j += 1) {
        const a = pos.get(nodes[i])!;
        const b = pos.get(nodes[j])!;
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        const d2 = Math.max(dx * dx + dy * dy, 1);
        const d = Math.sqrt(d2);
        dx /= d; dy /= d;
        const rep = (k * k) / d;
        disp.get(nodes[i])!.x += dx * rep;
        disp.get(nodes[i])!.y += dy * rep;
        disp.get(nodes[j])!.x -= dx * rep;
        disp.get(nodes[j])!.y -= dy * rep;
      }
    }
    for (const [a, b] of arcs) {
      const pa = pos.get(a); const pb = pos.get(b);
      if (!pa || !pb) continue;
      let dx = pa.x - pb.x;
      let dy = pa.y - pb.y;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      dx /= d; dy /= d;
      const att = (d * d) / k;
      disp.get(a)!.x -= dx * att;
      disp.get(a)!.y -= dy * att;
      disp.get(b)!.x += dx * att;
      disp.get(b)!.y += dy * att;
    }
    const temp = 20 * (1 - round / 150) + 1;
    for (const n of nodes) {
      const d = disp.get(n)!;
      const len = Math.max(Math.sqrt(d.x * d.x + d.y * d.y), 1e-9);
      const p = pos.get(n)!;
      p.x += (d.x / len) * Math.min(len, temp);
      p.y += (d.y / len) * Math.min(len, temp);
      p.x = Math.min(W - 30, Math.max(30, p.x));
      p.y = Math.min(H - 30, Math.max(30, p.y));
    }
    void vel;
  }
  return pos;
}

export function computeLayout(
  kind: LayoutKind, nodes: string[], arcs: [string, string][],
  selected?: string | null,
): Positions {
  switch (kind) {
    case 'tree':
      return rankLayout(nodes, arcs, 0.85);
    case 'layered':
      return rankLayout(nodes, arcs, 1.0);
    case 'star':
      return starLayout(nodes, selected);
    case 'circle':
      return circleLayout(nodes);
    case 'force':
    default:
      return forceLayout(nodes, arcs);
  }
}

export const CANVAS = { width: W, height: H };
