import { clear, el } from './dom.js';
import { ServerError } from './api.js';
import type { DiagramDoc, PolicyDoc } from './types.js';

export interface DecisionDeps {
  nodes: string[];
  levelsOf: (node: string) => string[];
  buildDiagram: (body: DiagramDoc) => Promise<DiagramDoc>;
  runPolicy: () => Promise<PolicyDoc>;
}

export function clampPayoff(value: number): number {
  if (Number.isNaN(value)) return 0;
  return Math.max(-1, Math.min(1, value));
}

/** Utility-node payoff editor, decision multi-select and the sorted policy
 * table (best row highlighted). Payoff inputs clamp client-side to [-1, 1];
 * an empty decision selection disables the run button. */
export function decisionBuilder(container: HTMLElement, deps: DecisionDeps): {
  renderPolicy: (doc: PolicyDoc) => void;
  readPayoffs: () => Record<string, number>;
  run: () => Promise<void>;
} {
  clear(container);
  const utilitySelect = el('select', { class: 'utility-select' },
    deps.nodes.map((n) => el('option', { value: n }, [n])));
  const payoffBox = el('div', { class: 'payoff-editor' });
  const decisionsBox = el('div', { class: 'decision-select' });
  const buildBtn = el('button', { class: 'build-diagram' }, ['build']);
  const runBtn = el('button', { class: 'run-policy', disabled: '' }, ['run policy']);
  const errorBox = el('div', { class: 'error-box' });
  const tableBox = el('div', { class: 'policy-table' });

  const payoffInputs = new Map<string, HTMLInputElement>();
  const decisionChecks = new Map<string, HTMLInputElement>();

  const renderPayoffs = () => {
    clear(payoffBox);
    payoffInputs.clear();
    for (const lv of deps.levelsOf(utilitySelect.value)) {
      const input = el('input', {
        type: 'number', step: '0.1', min: '-1', max: '1', value: '0',
        class: 'payoff-input', 'data-level': lv,
      });
      input.addEventListener('change', () => {
        const clamped = clampPayoff(Number(input.value));
        input.value = String(clamped);
      });
      payoffInputs.set(lv, input);
      payoffBox.append(el('label', { class: 'payoff-row' }, [`${lv} `, input]));
    }
  };

  const refreshRunEnabled = () => {
    const any = [...decisionChecks.values()].some((c) => c.checked);
    if (any) runBtn.removeAttribute('disabled');
    else runBtn.setAttribute('disabled', '');
  };

  const renderDecisions = () => {
    clear(decisionsBox);
    decisionChecks.clear();
    for (const n of deps.nodes) {
      if (n === utilitySelect.value) continue;
      const check = el('input', { type: 'checkbox', 'data-node': n });
      check.addEventListener('change', refreshRunEnabled);
      decisionChecks.set(n, check);
      decisionsBox.append(el('label', { class: 'decision-row' }, [check, ` ${n}`]));
    }
    refreshRunEnabled();
  };

  utilitySelect.addEventListener('change', () => {
    renderPayoffs();
    renderDecisions();
  });
  renderPayoffs();
  renderDecisions();

  const readPayoffs = () => {
    const out: Record<string, number> = {};
    for (const [lv, input] of payoffInputs) {
      out[lv] = clampPayoff(Number(input.value));
    }
    return out;
  };

  const renderPolicy = (doc: PolicyDoc) => {
    clear(tableBox);
    const table = el('table', { class: 'policy' });
    const head = el('tr', {});
    for (const v of doc.decision_vars) head.append(el('th', {}, [v]));
    head.append(el('th', {}, ['payoff']));
    table.append(head);
    doc.rows.forEach((row, i) => {
      const tr = el('tr', { class: i === 0 ? 'best-row' : '' });
      for (const v of doc.decision_vars) {
        tr.append(el('td', {}, [row.assignment[v]]));
      }
      tr.append(el('td', { class: 'payoff-cell' }, [row.payoff.toFixed(4)]));
      table.append(tr);
    });
    tableBox.append(table);
  };

  const run = async () => {
    clear(errorBox);
    try {
      const decisions = [...decisionChecks.entries()]
        .filter(([, c]) => c.checked).map(([n]) => n);
      await deps.buildDiagram({
        utility_var: utilitySelect.value,
        payoffs: readPayoffs(),
        decision_vars: decisions,
      });
      renderPolicy(await deps.runPolicy());
    } catch (err) {
      const message = err instanceof ServerError ? err.message : String(err);
      errorBox.append(el('span', { class: 'inline-error' }, [message]));
    }
  };

  buildBtn.addEventListener('click', () => { void run(); });
  runBtn.addEventListener('click', () => { void run(); });

  container.append(
    el('div', { class: 'decision-controls' }, [
      el('label', {}, ['utility node ', utilitySelect]),
      el('h3', {}, ['payoffs (-1 to 1)']),
      payoffBox,
      el('h3', {}, ['decision nodes']),
      decisionsBox,
      buildBtn, runBtn,
    ]),
    errorBox,
    tableBox,
  );

  return { renderPolicy, readPayoffs, run };
}
