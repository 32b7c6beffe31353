/** Wire formats exchanged with the search service. */

export interface PropertyDoc {
  name: string;
  polarity: 'higher_is_better' | 'lower_is_better';
  min?: number;
  max?: number;
  description?: string;
}

export interface SchemaDoc {
  properties: PropertyDoc[];
  version?: number;
}

export interface ProfileEntryDoc {
  checked: boolean;
  slider: number;
  ideal?: number;
}

export interface ProfileDoc {
  scale: number;
  entries: Record<string, ProfileEntryDoc>;
}

export interface SearchRequestDoc {
  query_text: string;
  profile: ProfileDoc;
  use_cphf: boolean;
  margin_percent: number;
}

export interface ResultEntryDoc {
  id: string;
  cpwi: number;
  type: string;
  lat: number;
  lon: number;
  values: Record<string, number>;
}

export interface SearchResponseDoc {
  results: ResultEntryDoc[];
  phase_timings: Record<string, number>;
  candidates_before_cphf: number;
  candidates_indexed: number;
  truncated: boolean;
  n_requested: number;
  snapshot_version: number;
  fallback: string | null;
}

export interface ProfileEchoDoc {
  profile: ProfileDoc;
  weights: Record<string, number> | null;
}
