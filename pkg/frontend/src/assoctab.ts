import { clear, el, option } from './dom.js';
import { renderNetwork } from './graphview.js';
import type { ApiClient } from './api.js';
import type { ViewState } from './state.js';

export interface AssocTabDeps {
  api: ApiClient;
  sessionId: string;
  view: ViewState;
}

/** Association explorer: measure + threshold, link communities (colored by
 * membership) and the edge-list export. */
export function assocTab(container: HTMLElement, deps: AssocTabDeps): void {
  clear(container);
  const measure = el('select', { class: 'measure-select' },
    [option('cramers_v', "Cramér's V"), option('tschuprow_t', "Tschuprow's T"),
     option('gk_lambda', 'Goodman-Kruskal lambda')]);
  const threshold = el('input', { type: 'number', step: '0.05', min: '0',
    max: '1', value: '0.3', class: 'threshold-input' });
  const buildBtn = el('button', { class: 'assoc-build' }, ['build']);
  const linkage = el('select', { class: 'linkage-select' },
    [option('ward'), option('single'), option('complete'), option('average')]);
  const commBtn = el('button', { class: 'assoc-communities' }, ['detect communities']);
  const info = el('div', { class: 'status-box' });
  const graphBox = el('div', { class: 'graph-box' });

  let nodes: string[] = [];
  let edges: [string, string, number][] = [];

  const draw = () => {
    renderNetwork(graphBox, nodes, edges.map(([a, b]) => [a, b]),
      { nodes, iterations: 0,
        entries: edges.map(([a, b, w]) => ({ a, b, strength: w, direction_ab: 0.5 })) },
      deps.view, {
        directed: false,
        onSelect: (n) => { deps.view.selected = n; draw(); },
      });
  };

  buildBtn.addEventListener('click', async () => {
    clear(info);
    try {
      const res = await deps.api.buildAssoc(deps.sessionId, measure.value,
        Number(threshold.value));
      nodes = res.nodes;
      edges = res.edges;
      info.append(el('span', {}, [`${edges.length} edges above threshold`]));
      deps.view.colorGroups = new Map();
      draw();
    } catch (err) {
      info.append(el('span', { class: 'inline-error' }, [String(err)]));
    }
  });

  commBtn.addEventListener('click', async () => {
    clear(info);
    try {
      const res = await deps.api.communities(deps.sessionId, linkage.value);
      info.append(el('span', {},
        [`partition density ${res.partition_density.toFixed(3)}`]));
      const groups = new Map<string, number>();
      for (const [a, b, cid] of res.communities) {
        groups.set(a, cid);
        groups.set(b, cid);
      }
      deps.view.colorGroups = groups;
      draw();
    } catch (err) {
      info.append(el('span', { class: 'inline-error' }, [String(err)]));
    }
  });

  container.append(
    el('div', { class: 'assoc-controls' }, [
      el('label', {}, ['measure ', measure]),
      el('label', {}, ['threshold ', threshold]),
      buildBtn,
      el('label', {}, ['linkage ', linkage]),
      commBtn,
      el('a', { href: deps.api.exportUrl(deps.sessionId, 'edgelist'),
        download: 'edgelist.csv' }, ['download edge list']),
    ]),
    info, graphBox,
  );
}
