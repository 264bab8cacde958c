import { clear, el, option } from './dom.js';
import type { ApiClient } from './api.js';
import type { SessionSummary } from './types.js';

export interface DataTabDeps {
  api: ApiClient;
  sessionId: string;
  onChanged: () => Promise<void>;
}

/** Upload, pre-process and explore: file input with delimiter options, the
 * pre-process actions (coerce, impute, discretize, interventions, drop) and
 * per-column frequency barplots. */
export function dataTab(container: HTMLElement, deps: DataTabDeps,
                        summary: SessionSummary): void {
  clear(container);
  const fileInput = el('input', { type: 'file', class: 'file-input' });
  const delimiter = el('select', { class: 'delimiter-select' },
    [option('comma'), option('semicolon'), option('tab'), option('space')]);
  const headerCheck = el('input', { type: 'checkbox', checked: '' });
  const thresholdInput = el('input', { type: 'number', value: '53', min: '2' });
  const uploadBtn = el('button', { class: 'upload-btn' }, ['upload']);
  const status = el('div', { class: 'status-box' });

  uploadBtn.addEventListener('click', async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    clear(status);
    try {
      await deps.api.uploadDataset(deps.sessionId, file, file.name, {
        delimiter: delimiter.value,
        header: headerCheck.checked,
        factor_level_threshold: Number(thresholdInput.value),
      });
      await deps.onChanged();
    } catch (err) {
      status.append(el('span', { class: 'inline-error' }, [String(err)]));
    }
  });

  container.append(el('div', { class: 'upload-controls' }, [
    fileInput,
    el('label', {}, ['delimiter ', delimiter]),
    el('label', {}, [headerCheck, ' header row']),
    el('label', {}, ['factor threshold ', thresholdInput]),
    uploadBtn,
  ]), status);

  if (!summary.dataset) {
    container.append(el('p', { class: 'hint' }, ['Upload a CSV to begin.']));
    return;
  }

  const ds = summary.dataset;
  container.append(el('p', { class: 'dataset-info' },
    [`${ds.name}: ${ds.n_rows} rows, ${ds.columns.length} columns`]));

  const colSelect = el('select', { class: 'column-select' },
    ds.columns.map((c) => option(c.name)));
  const actionSelect = el('select', { class: 'action-select' }, [
    option('impute', 'impute missing'),
    option('coerce_factor', 'to factor'),
    option('coerce_numeric', 'to numeric'),
    option('discretize', 'discretize'),
    option('interventions', 'mark as intervention indicator'),
    option('drop', 'drop column'),
  ]);
  const methodSelect = el('select', { class: 'disc-method' }, [
    option('hybrid'), option('hartemink'), option('kmeans'),
    option('quantile'), option('frequency'), option('interval'),
  ]);
  const binsInput = el('input', { type: 'number', value: '3', min: '2' });
  const applyBtn = el('button', { class: 'preprocess-apply' }, ['apply']);
  const errBox = el('div', { class: 'error-box' });

  applyBtn.addEventListener('click', async () => {
    clear(errBox);
    const action = actionSelect.value;
    const column = colSelect.value;
    let body: Record<string, unknown>;
    if (action === 'impute') body = { action: 'impute' };
    else if (action === 'coerce_factor') body = { action: 'coerce', column, to: 'factor' };
    else if (action === 'coerce_numeric') body = { action: 'coerce', column, to: 'numeric' };
    else if (action === 'discretize') {
      body = { action: 'discretize', method: methodSelect.value,
               bins: Number(binsInput.value), targets: [column] };
    } else if (action === 'interventions') {
      body = { action: 'interventions', column, index: true };
    } else body = { action: 'drop', column };
    try {
      await deps.api.preprocess(deps.sessionId, body);
      await deps.onChanged();
    } catch (err) {
      errBox.append(el('span', { class: 'inline-error' }, [String(err)]));
    }
  });

  const explore = el('div', { class: 'explore-plot' });
  const exploreBtn = el('button', { class: 'explore-btn' }, ['plot distribution']);
  exploreBtn.addEventListener('click', async () => {
    clear(explore);
    const res = await deps.api.summary(deps.sessionId, colSelect.value);
    const maxCount = Math.max(1, ...Object.values(res.counts));
    for (const [lv, count] of Object.entries(res.counts)) {
      const row = el('div', { class: 'bar-row' });
      row.append(el('span', { class: 'bar-label' }, [lv]));
      const bar = el('div', { class: 'bar' });
      bar.style.width = `${((count / maxCount) * 100).toFixed(1)}%`;
      row.append(bar, el('span', { class: 'bar-value' }, [String(count)]));
      explore.append(row);
    }
  });

  container.append(
    el('div', { class: 'preprocess-controls' }, [
      el('label', {}, ['column ', colSelect]),
      el('label', {}, ['action ', actionSelect]),
      el('label', {}, ['method ', methodSelect]),
      el('label', {}, ['bins ', binsInput]),
      applyBtn,
    ]),
    errBox,
    el('div', {}, [exploreBtn,
      el('a', { href: deps.api.exportUrl(deps.sessionId, 'dataset'),
        download: 'dataset.csv' }, ['download CSV'])]),
    explore,
  );
}
