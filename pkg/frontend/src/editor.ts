import { clear, el, option } from './dom.js';
import { ServerError } from './api.js';
import type { DagDoc } from './types.js';

export interface EditorDeps {
  nodes: string[];
  edit: (op: 'add' | 'remove' | 'reverse', from: string, to: string) =>
    Promise<{ dag: DagDoc }>;
  onChanged: (dag: DagDoc) => void;
  /** called with the nodes of a rejected cycle so the view can highlight them */
  onCycle: (cycle: string[]) => void;
}

/** Arc editing controls: add / remove / reverse, with cycle errors surfaced
 * inline and handed to the graph view for highlighting. */
export function structureEditor(container: HTMLElement, deps: EditorDeps): {
  apply: (op: 'add' | 'remove' | 'reverse', from: string, to: string) => Promise<void>;
} {
  clear(container);
  const opSelect = el('select', { class: 'edit-op' },
    [option('add'), option('remove'), option('reverse')]);
  const fromSelect = el('select', { class: 'edit-from' },
    deps.nodes.map((n) => option(n)));
  const toSelect = el('select', { class: 'edit-to' },
    deps.nodes.map((n) => option(n)));
  const applyBtn = el('button', { class: 'edit-apply' }, ['apply']);
  const errorBox = el('div', { class: 'error-box' });
  const history = el('ul', { class: 'edit-history' });

  const apply = async (op: 'add' | 'remove' | 'reverse', from: string, to: string) => {
    clear(errorBox);
    try {
      const res = await deps.edit(op, from, to);
      history.append(el('li', {}, [`${op} ${from} -> ${to}`]));
      deps.onChanged(res.dag);
      deps.onCycle([]);
    } catch (err) {
      if (err instanceof ServerError && err.body.detail?.cycle) {
        const cycle = err.body.detail.cycle;
        errorBox.append(el('span', { class: 'inline-error cycle-error' },
          [`cycle: ${cycle.join(' -> ')}`]));
        deps.onCycle(cycle);
      } else {
        errorBox.append(el('span', { class: 'inline-error' },
          [err instanceof Error ? err.message : String(err)]));
      }
    }
  };

  applyBtn.addEventListener('click', () => {
    void apply(opSelect.value as 'add' | 'remove' | 'reverse',
      fromSelect.value, toSelect.value);
  });

  container.append(
    el('div', { class: 'editor-controls' },
      [opSelect, fromSelect, el('span', {}, ['->']), toSelect, applyBtn]),
    errorBox,
    el('h3', {}, ['edit history']),
    history,
  );
  return { apply };
}
