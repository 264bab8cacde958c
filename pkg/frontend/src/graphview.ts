import { clear, svgEl } from './dom.js';
import { CANVAS, computeLayout } from './layouts.js';
import { neighborhood } from './state.js';
import type { ViewState } from './state.js';
import type { StrengthsDoc } from './types.js';

export interface GraphViewOptions {
  directed: boolean;
  onSelect?: (node: string | null) => void;
  /** extra class per node, e.g. cycle highlighting */
  nodeClass?: (node: string) => string;
}

const COLORS = ['#4e79a7', '#f28e2b', '#59a14f', '#e15759', '#b07aa1',
  '#76b7b2', '#edc948', '#ff9da7', '#9c755f'];
const SHAPES = ['circle', 'square', 'diamond'];

function strengthOf(strengths: StrengthsDoc | null, a: string, b: string): number {
  if (!strengths) return 1.0;
  const [lo, hi] = a < b ? [a, b] : [b, a];
  const entry = strengths.entries.find((e) => e.a === lo && e.b === hi);
  return entry ? entry.strength : 1.0;
}

export function edgeWidth(strength: number): number {
  return 0.8 + 3.2 * Math.max(0, Math.min(1, strength));
}

/** Render the graph into `container` as SVG.
 *
 * Clicking a node selects it; with a neighbor depth set, only nodes within
 * that many hops of the selection stay visible. Edge thickness encodes the
 * bootstrap strength when a strength table is present.
 */
export function renderNetwork(
  container: HTMLElement,
  nodes: string[],
  arcs: [string, string][],
  strengths: StrengthsDoc | null,
  view: ViewState,
  options: GraphViewOptions,
): SVGSVGElement {
  clear(container);
  const svg = svgEl('svg', {
    viewBox: `0 0 ${CANVAS.width} ${CANVAS.height}`,
    class: 'network-view',
  });
  const defs = svgEl('defs');
  const marker = svgEl('marker', {
    id: 'arrowhead', viewBox: '0 0 10 10', refX: '20', refY: '5',
    markerWidth: '6', markerHeight: '6', orient: 'auto-start-reverse',
  });
  marker.append(svgEl('path', { d: 'M 0 0 L 10 5 L 0 10 z', fill: '#778' }));
  defs.append(marker);
  svg.append(defs);

  let visible = new Set(nodes);
  if (view.selected && view.neighborDepth > 0) {
    visible = neighborhood(nodes, arcs, view.selected, view.neighborDepth);
  }

  const pos = computeLayout(view.layout, nodes, arcs, view.selected);
  for (const [a, b] of arcs) {
    if (!visible.has(a) || !visible.has(b)) continue;
    const pa = pos.get(a);
    const pb = pos.get(b);
    if (!pa || !pb) continue;
    const s = strengthOf(strengths, a, b);
    const line = svgEl('line', {
      x1: String(pa.x), y1: String(pa.y), x2: String(pb.x), y2: String(pb.y),
      class: 'arc', 'stroke-width': edgeWidth(s).toFixed(2),
      'data-from': a, 'data-to': b, 'data-strength': s.toFixed(3),
    });
    if (options.directed) line.setAttribute('marker-end', 'url(#arrowhead)');
    svg.append(line);
  }

  for (const n of nodes) {
    if (!visible.has(n)) continue;
    const p = pos.get(n);
    if (!p) continue;
    const g = svgEl('g', { class: 'node', 'data-node': n });
    if (n === view.selected) g.classList.add('selected');
    const extra = options.nodeClass?.(n);
    if (extra) g.classList.add(...extra.split(' ').filter(Boolean));
    const color = COLORS[(view.colorGroups.get(n) ?? 0) % COLORS.length];
    const shape = SHAPES[(view.shapeGroups.get(n) ?? 0) % SHAPES.length];
    if (shape === 'square') {
      g.append(svgEl('rect', {
        x: String(p.x - 8), y: String(p.y - 8), width: '16', height: '16',
        fill: color,
      }));
    } else if (shape === 'diamond') {
      g.append(svgEl('polygon', {
        points: `${p.x},${p.y - 10} ${p.x + 10},${p.y} ${p.x},${p.y + 10} ${p.x - 10},${p.y}`,
        fill: color,
      }));
    } else {
      g.append(svgEl('circle', {
        cx: String(p.x), cy: String(p.y), r: '9', fill: color,
      }));
    }
    const label = svgEl('text', {
      x: String(p.x + 12), y: String(p.y + 4),
      'font-size': String(view.fontSize),
    });
    label.textContent = n;
    g.append(label);
    g.addEventListener('click', () => options.onSelect?.(n));
    svg.append(g);
  }
  svg.addEventListener('click', (evt) => {
    if (evt.target === svg) options.onSelect?.(null);
  });
  container.append(svg);
  return svg;
}

/** Standalone HTML document embedding the current view, for download. */
export function exportStandaloneHtml(svg: SVGSVGElement, title: string): string {
  return [
    '<!doctype html><html><head><meta charset="utf-8">',
    `<title>${title}</title>`,
    '<style>.arc{stroke:#778;fill:none}.node text{font-family:sans-serif}</style>',
    '</head><body>',
    svg.outerHTML,
    '</body></html>',
  ].join('\n');
}
