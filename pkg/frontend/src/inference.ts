import { clear, el, option } from './dom.js';
import { ServerError } from './api.js';
import type { InferenceResult } from './types.js';

export type QueryFn = (
  event: string, evidence: Record<string, string>,
  options: { method?: string; repeats?: number },
) => Promise<InferenceResult>;

export interface InferencePanelDeps {
  nodes: string[];
  levelsOf: (node: string) => string[];
  query: QueryFn;
  evidence: Map<string, string>;
}

type SortMode = 'level' | 'probability';

/** Event picker, evidence chips and the conditional-probability bar plot.
 *
 * Every rendered number comes from the query callback's response: bars show
 * the distribution, whiskers the reported per-level standard deviation
 * (hidden when the server reports a single repeat). Sort and prune controls
 * reorder and trim the bars client-side.
 */
export function inferencePanel(container: HTMLElement, deps: InferencePanelDeps): {
  run: () => Promise<void>;
  setSort: (mode: SortMode) => void;
  setPrune: (n: number) => void;
} {
  let sortMode: SortMode = 'level';
  let prune = 0; // 0 = show all bars
  let last: InferenceResult | null = null;

  clear(container);
  const eventSelect = el('select', { class: 'event-select' },
    deps.nodes.map((n) => option(n)));
  const evidenceNode = el('select', { class: 'evidence-node' },
    deps.nodes.map((n) => option(n)));
  const evidenceLevel = el('select', { class: 'evidence-level' });
  const refreshLevels = () => {
    clear(evidenceLevel);
    for (const lv of deps.levelsOf(evidenceNode.value)) {
      evidenceLevel.append(option(lv));
    }
  };
  evidenceNode.addEventListener('change', refreshLevels);
  refreshLevels();

  const chips = el('div', { class: 'evidence-chips' });
  const addBtn = el('button', { class: 'add-evidence' }, ['add evidence']);
  const runBtn = el('button', { class: 'run-query' }, ['infer']);
  const methodSelect = el('select', { class: 'method-select' },
    [option('auto'), option('exact'), option('approximate')]);
  const sortSelect = el('select', { class: 'sort-select' },
    [option('level'), option('probability')]);
  const pruneInput = el('input', { class: 'prune-input', type: 'number',
    min: '0', value: '0' });
  const errorBox = el('div', { class: 'error-box' });
  const plot = el('div', { class: 'inference-plot' });

  const renderChips = () => {
    clear(chips);
    for (const [node, level] of deps.evidence) {
      const chip = el('span', { class: 'chip', 'data-node': node },
        [`${node} = ${level} `]);
      const x = el('button', { class: 'chip-remove' }, ['x']);
      x.addEventListener('click', () => {
        deps.evidence.delete(node);
        renderChips();
      });
      chip.append(x);
      chips.append(chip);
    }
  };

  addBtn.addEventListener('click', () => {
    deps.evidence.set(evidenceNode.value, evidenceLevel.value);
    renderChips();
  });

  const renderPlot = () => {
    clear(plot);
    if (!last) return;
    let entries = Object.entries(last.distribution);
    if (sortMode === 'probability') {
      entries = entries.sort((a, b) => b[1] - a[1]);
    }
    if (prune > 0) {
      entries = entries.slice(0, prune);
    }
    const showWhiskers = last.error_bars !== null && last.repeats > 1;
    for (const [level, p] of entries) {
      const row = el('div', { class: 'bar-row', 'data-level': level });
      row.append(el('span', { class: 'bar-label' }, [level]));
      const bar = el('div', { class: 'bar' });
      bar.style.width = `${(p * 100).toFixed(2)}%`;
      bar.dataset.p = String(p);
      row.append(bar);
      let text = p.toFixed(4);
      if (showWhiskers) {
        const sd = last.error_bars![level] ?? 0;
        const whisker = el('span', { class: 'whisker', 'data-sd': String(sd) });
        whisker.style.width = `${(sd * 100).toFixed(2)}%`;
        row.append(whisker);
        text += ` ± ${sd.toFixed(4)}`;
      }
      row.append(el('span', { class: 'bar-value' }, [text]));
      plot.append(row);
    }
    const note = `${last.method}, ${last.repeats} repeat(s)`;
    plot.append(el('div', { class: 'plot-note' }, [note]));
  };

  const run = async () => {
    clear(errorBox);
    try {
      last = await deps.query(eventSelect.value,
        Object.fromEntries(deps.evidence), { method: methodSelect.value });
      renderPlot();
    } catch (err) {
      last = null;
      clear(plot);
      const message = err instanceof ServerError ? err.message : String(err);
      errorBox.append(el('span', { class: 'inline-error' }, [message]));
    }
  };

  runBtn.addEventListener('click', () => { void run(); });
  sortSelect.addEventListener('change', () => {
    sortMode = sortSelect.value as SortMode;
    renderPlot();
  });
  pruneInput.addEventListener('change', () => {
    prune = Number(pruneInput.value) || 0;
    renderPlot();
  });

  container.append(
    el('div', { class: 'inference-controls' }, [
      el('label', {}, ['event ', eventSelect]),
      el('label', {}, ['evidence ', evidenceNode, evidenceLevel, addBtn]),
      chips,
      el('label', {}, ['method ', methodSelect]),
      el('label', {}, ['sort ', sortSelect]),
      el('label', {}, ['prune ', pruneInput]),
      runBtn,
    ]),
    errorBox,
    plot,
  );
  renderChips();

  return {
    run,
    setSort: (mode) => { sortMode = mode; renderPlot(); },
    setPrune: (n) => { prune = n; renderPlot(); },
  };
}
