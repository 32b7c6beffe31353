/** UI state and its pure transitions.
 *
 * Every input change marks the state stale until a fresh response lands,
 * so the table can signal that it no longer reflects the controls.
 */

import type {
  ProfileDoc,
  SchemaDoc,
  SearchRequestDoc,
  SearchResponseDoc,
} from './types.js';

export interface EntryState {
  checked: boolean;
  slider: number;
  /** Ideal in normalized [0,1] space; null means "best" (the default). */
  ideal: number | null;
}

export interface UiState {
  schema: SchemaDoc;
  scale: number;
  entries: Record<string, EntryState>;
  queryText: string;
  n: number;
  useCphf: boolean;
  marginPercent: number;
  lastResponse: SearchResponseDoc | null;
  stale: boolean;
}

export const DEFAULT_SCALE = 100;
export const DEFAULT_N = 10;

export function initialState(schema: SchemaDoc): UiState {
  const entries: Record<string, EntryState> = {};
  for (const prop of schema.properties) {
    entries[prop.name] = { checked: false, slider: 0, ideal: null };
  }
  return {
    schema,
    scale: DEFAULT_SCALE,
    entries,
    queryText: '',
    n: DEFAULT_N,
    useCphf: false,
    marginPercent: 0,
    lastResponse: null,
    stale: false,
  };
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export function setChecked(state: UiState, name: string, checked: boolean): void {
  const entry = state.entries[name];
  if (!entry) return;
  entry.checked = checked;
  state.stale = true;
}

export function setSlider(state: UiState, name: string, value: number): void {
  const entry = state.entries[name];
  if (!entry) return;
  entry.slider = clamp(Math.round(value), 0, state.scale);
  state.stale = true;
}

/** Rescales every slider proportionally so relative priorities survive. */
export function setScale(state: UiState, newScale: number): void {
  const scale = Math.max(1, Math.round(newScale));
  if (scale === state.scale) return;
  for (const entry of Object.values(state.entries)) {
    entry.slider = clamp(Math.round((entry.slider * scale) / state.scale), 0, scale);
  }
  state.scale = scale;
  state.stale = true;
}

export function setIdeal(state: UiState, name: string, ideal: number | null): void {
  const entry = state.entries[name];
  if (!entry) return;
  entry.ideal = ideal === null ? null : clamp(ideal, 0, 1);
  state.stale = true;
}

export function setQueryText(state: UiState, text: string): void {
  state.queryText = text;
  state.stale = true;
}

export function setN(state: UiState, n: number): void {
  state.n = Math.max(1, Math.round(n));
  state.stale = true;
}

export function setUseCphf(state: UiState, useCphf: boolean): void {
  state.useCphf = useCphf;
  state.stale = true;
}

export function setMargin(state: UiState, margin: number): void {
  state.marginPercent = Math.max(0, margin);
  state.stale = true;
}

/** Serializes every control row, checked or not, so round-trips are exact. */
export function buildProfile(state: UiState): ProfileDoc {
  const entries: ProfileDoc['entries'] = {};
  for (const [name, entry] of Object.entries(state.entries)) {
    entries[name] = {
      checked: entry.checked,
      slider: entry.slider,
      ...(entry.ideal !== null ? { ideal: entry.ideal } : {}),
    };
  }
  return { scale: state.scale, entries };
}

/** Re-applies a profile document (e.g. echoed by the service). */
export function applyProfile(state: UiState, profile: ProfileDoc): void {
  state.scale = profile.scale;
  for (const [name, doc] of Object.entries(profile.entries)) {
    if (!(name in state.entries)) continue;
    state.entries[name] = {
      checked: doc.checked,
      slider: doc.slider,
      ideal: doc.ideal ?? null,
    };
  }
  state.stale = true;
}

/** The comparative weights the service will derive from this state. */
export function expectedWeights(state: UiState): Record<string, number> | null {
  const checked = Object.entries(state.entries).filter(([, e]) => e.checked);
  if (checked.length === 0) return null;
  const total = checked.reduce((acc, [, e]) => acc + e.slider, 0);
  const weights: Record<string, number> = {};
  for (const [name, entry] of checked) {
    weights[name] = total === 0 ? 1 / checked.length : entry.slider / total;
  }
  return weights;
}

/** Default query generated from the controls when the box is untouched. */
export function defaultQuery(state: UiState): string {
  return `n = ${state.n}`;
}

const N_CLAUSE = /\bn\s*=/;

export function buildRequest(state: UiState): SearchRequestDoc {
  let query = state.queryText.trim();
  if (query === '') {
    query = defaultQuery(state);
  } else if (!N_CLAUSE.test(query)) {
    query = `${query} AND n = ${state.n}`;
  }
  return {
    query_text: query,
    profile: buildProfile(state),
    use_cphf: state.useCphf,
    margin_percent: state.marginPercent,
  };
}

export function applyResponse(state: UiState, response: SearchResponseDoc): void {
  state.lastResponse = response;
  state.stale = false;
}

export function checkedProperties(state: UiState): string[] {
  return Object.entries(state.entries)
    .filter(([, e]) => e.checked)
    .map(([name]) => name);
}
