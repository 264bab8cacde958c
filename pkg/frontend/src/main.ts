import { ApiClient } from './api.js';
import { assocTab } from './assoctab.js';
import { detectBundle, loadBundle } from './bundle.js';
import { dataTab } from './datatab.js';
import { decisionBuilder } from './decision.js';
import { clear, el, option } from './dom.js';
import { structureEditor } from './editor.js';
import { exportStandaloneHtml, renderNetwork } from './graphview.js';
import { inferencePanel } from './inference.js';
import { initialViewState, LAYOUTS } from './state.js';
import type { BundleSession } from './bundle.js';
import type { DagDoc, JobStatus, SessionSummary } from './types.js';

const TABS = ['data', 'association', 'network', 'decision', 'publish'] as const;

async function startServerMode(root: HTMLElement): Promise<void> {
  const api = new ApiClient();
  const stored = window.localStorage.getItem('cbench-session');
  let sessionId: string;
  if (stored) {
    sessionId = stored;
    try {
      await api.session(sessionId);
    } catch {
      sessionId = (await api.createSession()).id;
    }
  } else {
    sessionId = (await api.createSession()).id;
  }
  window.localStorage.setItem('cbench-session', sessionId);

  const view = initialViewState();
  let summary: SessionSummary = await api.session(sessionId);
  let cycleNodes: string[] = [];
  let currentJob: string | null = null;

  const tabBar = el('nav', { class: 'tab-bar' });
  const body = el('main', { class: 'tab-body' });
  root.append(el('h1', {}, ['cbench workbench']), tabBar, body);

  const refresh = async () => {
    summary = await api.session(sessionId);
    render();
  };

  const levelsOf = (node: string): string[] =>
    summary.dataset?.columns.find((c) => c.name === node)?.levels ?? [];

  const renderNetworkTab = (container: HTMLElement) => {
    clear(container);
    const vars = summary.dataset?.columns
      .filter((c) => c.kind === 'factor'
        && !summary.dataset!.indicator_columns.includes(c.name))
      .map((c) => c.name) ?? [];

    // learning controls
    const algo = el('select', { class: 'algo-select' },
      ['hc', 'tabu', 'gs', 'pc_stable', 'chow_liu'].map((a) => option(a)));
    const score = el('select', { class: 'score-select' },
      ['bic', 'aic', 'bde', 'mbde', 'loglik'].map((s) => option(s)));
    const iss = el('input', { type: 'number', value: '1', min: '0.001' });
    const bootstraps = el('input', { type: 'number', value: '0', min: '0' });
    const edgeThr = el('input', { type: 'number', value: '0.51', step: '0.01' });
    const dirThr = el('input', { type: 'number', value: '0.51', step: '0.01' });
    const seed = el('input', { type: 'number', value: '0' });
    const learnBtn = el('button', { class: 'learn-btn' }, ['learn structure']);
    const cancelBtn = el('button', { class: 'cancel-btn' }, ['cancel']);
    const jobBox = el('div', { class: 'job-box' });

    const poll = async (job: string) => {
      currentJob = job;
      const tick = async () => {
        if (currentJob !== job) return; // stale poller
        const status: JobStatus = await api.job(sessionId, job);
        jobBox.textContent = `job ${status.status} (${status.done}/${status.total})`;
        if (status.status === 'running') {
          window.setTimeout(() => { void tick(); }, 300);
        } else if (status.status === 'done') {
          await refresh();
        }
      };
      await tick();
    };

    learnBtn.addEventListener('click', async () => {
      const n = Number(bootstraps.value);
      const bodyDoc: Record<string, unknown> = {
        search: { algorithm: algo.value,
          score: { kind: score.value, iss: Number(iss.value) },
          seed: Number(seed.value) },
      };
      if (n > 0) {
        bodyDoc.bootstrap = {
          iterations: n, seed: Number(seed.value),
          edge_threshold: Number(edgeThr.value),
          direction_threshold: Number(dirThr.value),
        };
      }
      const res = await api.learn(sessionId, bodyDoc);
      void poll(res.job);
    });
    cancelBtn.addEventListener('click', () => {
      if (currentJob) void api.cancelJob(sessionId, currentJob);
    });

    const layoutSelect = el('select', { class: 'layout-select' },
      LAYOUTS.map((l) => option(l)));
    layoutSelect.value = view.layout;
    const depthInput = el('input', { type: 'number', value: String(view.neighborDepth),
      min: '0', class: 'depth-input' });
    const fontInput = el('input', { type: 'number', value: String(view.fontSize),
      min: '6', class: 'font-input' });
    const downloadBtn = el('button', { class: 'download-html' }, ['download HTML']);

    const graphBox = el('div', { class: 'graph-box' });
    const drawGraph = () => {
      if (!summary.dag) {
        clear(graphBox);
        graphBox.append(el('p', { class: 'hint' }, ['No structure yet.']));
        return;
      }
      renderNetwork(graphBox, summary.dag.nodes, summary.dag.arcs,
        summary.strengths, view, {
          directed: true,
          onSelect: (n) => { view.selected = n; drawGraph(); },
          nodeClass: (n) => (cycleNodes.includes(n) ? 'cycle-node' : ''),
        });
    };
    layoutSelect.addEventListener('change', () => {
      view.layout = layoutSelect.value as typeof view.layout;
      drawGraph();
    });
    depthInput.addEventListener('change', () => {
      view.neighborDepth = Number(depthInput.value) || 0;
      drawGraph();
    });
    fontInput.addEventListener('change', () => {
      view.fontSize = Number(fontInput.value) || 11;
      drawGraph();
    });
    downloadBtn.addEventListener('click', () => {
      const svg = graphBox.querySelector('svg');
      if (!svg) return;
      const doc = exportStandaloneHtml(svg, 'network');
      const a = el('a', {
        href: URL.createObjectURL(new Blob([doc], { type: 'text/html' })),
        download: 'network.html',
      });
      a.click();
    });

    const editorBox = el('div', { class: 'editor-box' });
    structureEditor(editorBox, {
      nodes: summary.dag?.nodes ?? vars,
      edit: (op, from, to) => api.edit(sessionId, op, from, to) as
        Promise<{ dag: DagDoc }>,
      onChanged: () => { void refresh(); },
      onCycle: (cycle) => { cycleNodes = cycle; drawGraph(); },
    });

    const fitBtn = el('button', { class: 'fit-btn' }, ['fit parameters']);
    fitBtn.addEventListener('click', async () => {
      await api.fit(sessionId);
      await refresh();
    });

    const inferBox = el('div', { class: 'inference-box' });
    if (summary.fitted && summary.dag) {
      inferencePanel(inferBox, {
        nodes: summary.dag.nodes,
        levelsOf,
        evidence: view.evidence,
        query: (event, evidence, opts) =>
          api.query(sessionId, event, evidence, opts),
      });
    } else {
      inferBox.append(el('p', { class: 'hint' },
        ['Fit parameters to enable inference.']));
    }

    container.append(
      el('div', { class: 'learn-controls' }, [
        el('label', {}, ['algorithm ', algo]),
        el('label', {}, ['score ', score]),
        el('label', {}, ['iss ', iss]),
        el('label', {}, ['bootstraps ', bootstraps]),
        el('label', {}, ['edge > ', edgeThr]),
        el('label', {}, ['direction > ', dirThr]),
        el('label', {}, ['seed ', seed]),
        learnBtn, cancelBtn, jobBox,
      ]),
      el('div', { class: 'visual-controls' }, [
        el('label', {}, ['layout ', layoutSelect]),
        el('label', {}, ['neighbor depth ', depthInput]),
        el('label', {}, ['font ', fontInput]),
        downloadBtn,
        el('a', { href: api.exportUrl(sessionId, 'model'),
          download: 'model.json' }, ['download model']),
        el('a', { href: api.exportUrl(sessionId, 'cpt'),
          download: 'cpts.csv' }, ['download CPTs']),
      ]),
      graphBox, editorBox, fitBtn, inferBox,
    );
    drawGraph();
  };

  const renderDecisionTab = (container: HTMLElement) => {
    clear(container);
    if (!summary.fitted || !summary.dag) {
      container.append(el('p', { class: 'hint' },
        ['Learn a structure and fit parameters first.']));
      return;
    }
    decisionBuilder(container, {
      nodes: summary.dag.nodes,
      levelsOf,
      buildDiagram: (bodyDoc) => api.buildDecision(sessionId, bodyDoc),
      runPolicy: () => api.policy(sessionId, {}),
    });
  };

  const renderPublishTab = (container: HTMLElement) => {
    clear(container);
    const nameInput = el('input', { type: 'text', value: 'dashboard' });
    const btn = el('button', { class: 'publish-btn' }, ['build dashboard bundle']);
    const status = el('div', { class: 'status-box' });
    btn.addEventListener('click', async () => {
      clear(status);
      try {
        const blob = await api.publish(sessionId, nameInput.value);
        const a = el('a', {
          href: URL.createObjectURL(blob),
          download: `${nameInput.value}.zip`,
        });
        a.click();
        status.append(el('span', {}, ['bundle downloaded']));
      } catch (err) {
        status.append(el('span', { class: 'inline-error' }, [String(err)]));
      }
    });
    container.append(
      el('p', {}, ['Package the fitted model and viewer into a standalone zip.']),
      el('label', {}, ['name ', nameInput]), btn, status);
  };

  const render = () => {
    clear(tabBar);
    for (const tab of TABS) {
      const btn = el('button', {
        class: `tab ${view.activeTab === tab ? 'active' : ''}`,
      }, [tab]);
      btn.addEventListener('click', () => {
        view.activeTab = tab;
        render();
      });
      tabBar.append(btn);
    }
    clear(body);
    const pane = el('section', { class: `pane pane-${view.activeTab}` });
    body.append(pane);
    if (view.activeTab === 'data') {
      dataTab(pane, { api, sessionId, onChanged: refresh }, summary);
    } else if (view.activeTab === 'association') {
      assocTab(pane, { api, sessionId, view });
    } else if (view.activeTab === 'network') {
      renderNetworkTab(pane);
    } else if (view.activeTab === 'decision') {
      renderDecisionTab(pane);
    } else {
      renderPublishTab(pane);
    }
  };

  render();
}

async function startBundleMode(root: HTMLElement, bundle: BundleSession):
    Promise<void> {
  const view = initialViewState();
  root.append(el('h1', {}, [`${bundle.name} (read-only dashboard)`]));
  const graphBox = el('div', { class: 'graph-box' });
  const layoutSelect = el('select', { class: 'layout-select' },
    LAYOUTS.map((l) => option(l)));
  const depthInput = el('input', { type: 'number', value: '0', min: '0',
    class: 'depth-input' });
  const inferBox = el('div', { class: 'inference-box' });

  const draw = () => {
    renderNetwork(graphBox, bundle.nodes, bundle.arcs, bundle.strengths, view, {
      directed: true,
      onSelect: (n) => { view.selected = n; draw(); },
    });
  };
  layoutSelect.addEventListener('change', () => {
    view.layout = layoutSelect.value as typeof view.layout;
    draw();
  });
  depthInput.addEventListener('change', () => {
    view.neighborDepth = Number(depthInput.value) || 0;
    draw();
  });

  inferencePanel(inferBox, {
    nodes: bundle.nodes,
    levelsOf: bundle.levelsOf,
    evidence: view.evidence,
    query: (event, evidence) => bundle.query(event, evidence),
  });

  root.append(
    el('div', { class: 'visual-controls' }, [
      el('label', {}, ['layout ', layoutSelect]),
      el('label', {}, ['neighbor depth ', depthInput]),
    ]),
    graphBox, inferBox,
  );
  draw();
}

export async function start(root: HTMLElement): Promise<void> {
  if (await detectBundle()) {
    await startBundleMode(root, await loadBundle());
  } else {
    await startServerMode(root);
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  void start(document.getElementById('app')!);
}
