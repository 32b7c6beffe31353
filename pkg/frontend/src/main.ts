/** DOM wiring for the priority-tuning tool.
 *
 * One row per context property (check-box, slider, ideal field), a scale
 * control that rescales sliders proportionally, a query box, and a results
 * table that live-updates 300 ms after a slider is released. Failed
 * requests keep the previous table and flag it stale.
 */

import { SEARCH_DEBOUNCE_MS, SearchClient, debounce } from './client.js';
import {
  UiState,
  applyResponse,
  buildRequest,
  checkedProperties,
  initialState,
  setChecked,
  setIdeal,
  setMargin,
  setN,
  setQueryText,
  setScale,
  setSlider,
  setUseCphf,
} from './state.js';
import { buildTable } from './table.js';

const client = new SearchClient('');
let state: UiState | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showToast(message: string): void {
  const toast = el<HTMLDivElement>('toast');
  toast.textContent = message;
  toast.classList.add('visible');
  setTimeout(() => toast.classList.remove('visible'), 4000);
}

function renderStatus(): void {
  if (!state) return;
  const status = el<HTMLDivElement>('status');
  const parts: string[] = [];
  const response = state.lastResponse;
  if (response) {
    parts.push(`${response.results.length} of ${response.n_requested} requested`);
    parts.push(`${response.candidates_before_cphf} matched`);
    if (response.candidates_indexed > 0) {
      parts.push(`${response.candidates_indexed} indexed`);
    }
    const totalUs = Object.values(response.phase_timings).reduce((a, b) => a + b, 0);
    parts.push(`${(totalUs / 1000).toFixed(1)} ms`);
  }
  if (state.stale) parts.push('stale: controls changed since this result');
  status.textContent = parts.join(' | ');
}

function renderNotices(): void {
  if (!state) return;
  const notice = el<HTMLDivElement>('notice');
  const response = state.lastResponse;
  if (response?.truncated) {
    notice.textContent =
      'Fewer sensors matched than requested; showing the unranked filtered set.';
  } else if (response?.fallback === 'no_checked_properties') {
    notice.textContent =
      'No properties are checked; showing the first matches unranked. ' +
      'Check at least one property to rank.';
  } else {
    notice.textContent = '';
  }
}

function renderTable(): void {
  if (!state) return;
  const container = el<HTMLDivElement>('results');
  const response = state.lastResponse;
  if (!response) {
    container.innerHTML = '<p class="hint">Run a search to see ranked sensors.</p>';
    return;
  }
  const model = buildTable(response, checkedProperties(state));
  const table = document.createElement('table');
  const head = table.createTHead().insertRow();
  for (const column of model.columns) {
    const th = document.createElement('th');
    th.textContent = column;
    head.appendChild(th);
  }
  const body = table.createTBody();
  for (const row of model.rows) {
    const tr = body.insertRow();
    tr.insertCell().textContent = String(row.rank);
    tr.insertCell().textContent = row.id;
    tr.insertCell().textContent = row.cpwi.toFixed(5);
    tr.insertCell().textContent = row.sensorType;
    for (const value of row.values) {
      tr.insertCell().textContent = value === null ? '' : value.toFixed(4);
    }
  }
  container.innerHTML = '';
  container.appendChild(table);
  container.classList.toggle('stale', state.stale);
}

async function runSearch(): Promise<void> {
  if (!state) return;
  try {
    const response = await client.search(buildRequest(state));
    if (response === null) return; // superseded by a newer submission
    applyResponse(state, response);
  } catch (err) {
    showToast(err instanceof Error ? err.message : String(err));
  }
  renderTable();
  renderNotices();
  renderStatus();
}

const debouncedSearch = debounce(() => void runSearch(), SEARCH_DEBOUNCE_MS);

function afterInputChange(): void {
  renderStatus();
  debouncedSearch.call();
}

function renderPriorityPanel(): void {
  if (!state) return;
  const panel = el<HTMLDivElement>('priority-panel');
  panel.innerHTML = '';
  for (const prop of state.schema.properties) {
    const entry = state.entries[prop.name];
    const row = document.createElement('div');
    row.className = 'property-row' + (entry.checked ? '' : ' disabled');

    const check = document.createElement('input');
    check.type = 'checkbox';
    check.checked = entry.checked;
    check.title = `consider ${prop.name} when ranking`;

    const label = document.createElement('label');
    label.textContent = prop.name;
    label.title = prop.polarity === 'lower_is_better' ? 'lower is better' : 'higher is better';

    const slider = document.createElement('input');
    slider.type = 'range';
    slider.min = '0';
    slider.max = String(state.scale);
    slider.value = String(entry.slider);
    slider.disabled = !entry.checked;

    const sliderValue = document.createElement('span');
    sliderValue.className = 'slider-value';
    sliderValue.textContent = String(entry.slider);

    const ideal = document.createElement('input');
    ideal.type = 'number';
    ideal.min = '0';
    ideal.max = '1';
    ideal.step = '0.05';
    ideal.placeholder = '1.0';
    ideal.title = 'ideal value in [0,1]; empty means best';
    ideal.value = entry.ideal === null ? '' : String(entry.ideal);
    ideal.disabled = !entry.checked;

    check.addEventListener('change', () => {
      if (!state) return;
      setChecked(state, prop.name, check.checked);
      slider.disabled = !check.checked;
      ideal.disabled = !check.checked;
      row.classList.toggle('disabled', !check.checked);
      afterInputChange();
    });
    slider.addEventListener('input', () => {
      if (!state) return;
      setSlider(state, prop.name, Number(slider.value));
      sliderValue.textContent = slider.value;
      renderStatus();
    });
    // resubmit only after release, then debounced
    slider.addEventListener('change', afterInputChange);
    ideal.addEventListener('change', () => {
      if (!state) return;
      setIdeal(state, prop.name, ideal.value === '' ? null : Number(ideal.value));
      afterInputChange();
    });

    row.append(check, label, slider, sliderValue, ideal);
    panel.appendChild(row);
  }
}

function wireGlobalControls(): void {
  const scale = el<HTMLInputElement>('scale');
  const count = el<HTMLInputElement>('n');
  const query = el<HTMLTextAreaElement>('query');
  const cphf = el<HTMLInputElement>('use-cphf');
  const margin = el<HTMLInputElement>('margin');
  const run = el<HTMLButtonElement>('run');

  scale.addEventListener('change', () => {
    if (!state) return;
    setScale(state, Number(scale.value));
    scale.value = String(state.scale);
    renderPriorityPanel();
    afterInputChange();
  });
  count.addEventListener('change', () => {
    if (!state) return;
    setN(state, Number(count.value));
    count.value = String(state.n);
    query.placeholder = `n = ${state.n}`;
    afterInputChange();
  });
  query.addEventListener('change', () => {
    if (!state) return;
    setQueryText(state, query.value);
    afterInputChange();
  });
  cphf.addEventListener('change', () => {
    if (!state) return;
    setUseCphf(state, cphf.checked);
    margin.disabled = !cphf.checked;
    afterInputChange();
  });
  margin.addEventListener('change', () => {
    if (!state) return;
    setMargin(state, Number(margin.value));
    margin.value = String(state.marginPercent);
    afterInputChange();
  });
  run.addEventListener('click', () => {
    debouncedSearch.cancel();
    void runSearch();
  });
}

async function boot(): Promise<void> {
  const banner = el<HTMLDivElement>('banner');
  try {
    const schema = await client.fetchSchema();
    state = initialState(schema);
    banner.classList.remove('visible');
    renderPriorityPanel();
    wireGlobalControls();
    renderTable();
  } catch (err) {
    banner.textContent =
      'Could not load the property schema (is a catalog loaded?). Retrying…';
    banner.classList.add('visible');
    setTimeout(() => void boot(), 2000);
  }
}

void boot();
