import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { structureEditor } from '../src/editor.js';
import { mockFetch } from './mock.js';
import type { DagDoc } from '../src/types.js';

import errorCycle from './fixtures/error_cycle.json';

describe('structure editor', () => {
  beforeEach(() => {
    document.body.innerHTML = '';
  });

  it('posts edits and appends to the visible history', async () => {
    const newDag: DagDoc = { nodes: ['A', 'B'], arcs: [['B', 'A']] };
    const { fetchFn, calls } = mockFetch([
      { method: 'POST', match: /\/structure\/edit$/, response: { dag: newDag } },
    ]);
    const api = new ApiClient(fetchFn);
    const container = document.createElement('div');
    let changed: DagDoc | null = null;
    const editor = structureEditor(container, {
      nodes: ['A', 'B'],
      edit: (op, from, to) => api.edit('s1', op, from, to) as Promise<{ dag: DagDoc }>,
      onChanged: (dag) => { changed = dag; },
      onCycle: () => {},
    });
    await editor.apply('reverse', 'A', 'B');
    expect(changed).toEqual(newDag);
    const call = calls[0];
    expect(call.body).toEqual({ op: 'reverse', from: 'A', to: 'B' });
    const history = container.querySelector('.edit-history')!;
    expect(history.textContent).toContain('reverse A -> B');
  });

  it('renders the server cycle error and hands the path to the view', async () => {
    const { fetchFn } = mockFetch([
      { method: 'POST', match: /\/structure\/edit$/, status: errorCycle.status,
        response: errorCycle.body },
    ]);
    const api = new ApiClient(fetchFn);
    const container = document.createElement('div');
    let highlighted: string[] = [];
    const editor = structureEditor(container, {
      nodes: ['A', 'B'],
      edit: (op, from, to) => api.edit('s1', op, from, to) as Promise<{ dag: DagDoc }>,
      onChanged: () => {},
      onCycle: (cycle) => { highlighted = cycle; },
    });
    await editor.apply('add', 'B', 'A');
    expect(highlighted).toEqual(errorCycle.body.detail.cycle);
    const err = container.querySelector('.cycle-error')!;
    for (const node of errorCycle.body.detail.cycle) {
      expect(err.textContent).toContain(node);
    }
    expect(container.querySelectorAll('.edit-history li').length).toBe(0);
  });
});
