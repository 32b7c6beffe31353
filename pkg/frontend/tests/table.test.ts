import { describe, expect, it } from 'vitest';

import { buildTable, tablesEqual } from '../src/table.js';
import type { ResultEntryDoc, SearchResponseDoc } from '../src/types.js';

function response(results: ResultEntryDoc[], truncated = false): SearchResponseDoc {
  return {
    results,
    phase_timings: {},
    candidates_before_cphf: results.length,
    candidates_indexed: results.length,
    truncated,
    n_requested: results.length,
    snapshot_version: 1,
    fallback: null,
  };
}

function entry(id: string, cpwi: number, values: Record<string, number>): ResultEntryDoc {
  return { id, cpwi, type: 'temperature', lat: 0, lon: 0, values };
}

describe('buildTable', () => {
  it('keeps rows exactly in response order, never re-sorting', () => {
    // service order is authoritative even when it looks unsorted client-side
    const doc = response([
      entry('b', 0.5, { accuracy: 0.2 }),
      entry('a', 0.1, { accuracy: 0.9 }),
      entry('c', 0.3, { accuracy: 0.4 }),
    ]);
    const table = buildTable(doc, ['accuracy']);
    expect(table.rows.map((r) => r.id)).toEqual(['b', 'a', 'c']);
    expect(table.rows.map((r) => r.rank)).toEqual([1, 2, 3]);
  });

  it('shows checked property columns and blanks missing values', () => {
    const doc = response([entry('a', 0.1, { accuracy: 0.9 })]);
    const table = buildTable(doc, ['accuracy', 'latency']);
    expect(table.columns).toEqual(['rank', 'id', 'cpwi', 'type', 'accuracy', 'latency']);
    expect(table.rows[0].values).toEqual([0.9, null]);
  });

  it('surfaces the truncated flag', () => {
    const doc = response([entry('a', 0, {})], true);
    expect(buildTable(doc, []).truncated).toBe(true);
  });

  it('preserves response order across 20 scripted interactions', () => {
    let seed = 12345;
    const rand = () => {
      // deterministic LCG so the scripted interactions are reproducible
      seed = (seed * 1103515245 + 12345) % 2147483648;
      return seed / 2147483648;
    };
    for (let interaction = 0; interaction < 20; interaction++) {
      const count = 1 + Math.floor(rand() * 30);
      const results: ResultEntryDoc[] = [];
      for (let i = 0; i < count; i++) {
        results.push(
          entry(`s${Math.floor(rand() * 1e6)}`, rand(), { accuracy: rand() }),
        );
      }
      const table = buildTable(response(results), ['accuracy']);
      expect(table.rows.map((r) => r.id)).toEqual(results.map((r) => r.id));
      expect(table.rows.map((r) => r.cpwi)).toEqual(results.map((r) => r.cpwi));
    }
  });
});

describe('tablesEqual', () => {
  it('detects identical and differing tables', () => {
    const a = buildTable(response([entry('a', 0.1, { accuracy: 1 })]), ['accuracy']);
    const b = buildTable(response([entry('a', 0.1, { accuracy: 1 })]), ['accuracy']);
    const c = buildTable(response([entry('a', 0.2, { accuracy: 1 })]), ['accuracy']);
    expect(tablesEqual(a, b)).toBe(true);
    expect(tablesEqual(a, c)).toBe(false);
  });
});
