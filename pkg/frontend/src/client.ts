/** Service client: sequence-numbered searches and a trailing debounce.
 *
 * Only the newest submission may update the UI: every request gets a
 * sequence number and a response is dropped when a newer one has already
 * been applied.
 */

import type {
  ProfileDoc,
  ProfileEchoDoc,
  SchemaDoc,
  SearchRequestDoc,
  SearchResponseDoc,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(public status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function readError(response: Response): Promise<ServiceError> {
  let detail = response.statusText;
  try {
    const doc = await response.json();
    if (doc && typeof doc.detail === 'string') detail = doc.detail;
  } catch {
    // non-JSON body; keep the status text
  }
  return new ServiceError(response.status, detail);
}

export class SearchClient {
  private nextSeq = 0;
  private appliedSeq = 0;

  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async fetchSchema(): Promise<SchemaDoc> {
    const response = await this.fetchImpl(`${this.baseUrl}/schema`);
    if (!response.ok) throw await readError(response);
    return (await response.json()) as SchemaDoc;
  }

  async echoProfile(profile: ProfileDoc): Promise<ProfileEchoDoc> {
    const response = await this.fetchImpl(`${this.baseUrl}/profile/echo`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(profile),
    });
    if (!response.ok) throw await readError(response);
    return (await response.json()) as ProfileEchoDoc;
  }

  /**
   * Submits a search; resolves with the response when this submission is
   * still the newest one, or null when a later submission superseded it.
   */
  async search(request: SearchRequestDoc): Promise<SearchResponseDoc | null> {
    const seq = ++this.nextSeq;
    const response = await this.fetchImpl(`${this.baseUrl}/search`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(request),
    });
    if (seq <= this.appliedSeq) return null; // a newer response already landed
    if (!response.ok) throw await readError(response);
    const doc = (await response.json()) as SearchResponseDoc;
    if (seq <= this.appliedSeq) return null;
    this.appliedSeq = seq;
    return doc;
  }
}

export interface Debounced<A extends unknown[]> {
  call(...args: A): void;
  cancel(): void;
  flush(): void;
}

/** Trailing-edge debounce; used to resubmit 300 ms after slider release. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delayMs: number,
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let pending: A | null = null;
  return {
    call(...args: A) {
      pending = args;
      if (timer !== null) clearTimeout(timer);
      timer = setTimeout(() => {
        timer = null;
        const args2 = pending as A;
        pending = null;
        fn(...args2);
      }, delayMs);
    },
    cancel() {
      if (timer !== null) clearTimeout(timer);
      timer = null;
      pending = null;
    },
    flush() {
      if (timer === null) return;
      clearTimeout(timer);
      timer = null;
      const args = pending as A;
      pending = null;
      fn(...args);
    },
  };
}

export const SEARCH_DEBOUNCE_MS = 300;
