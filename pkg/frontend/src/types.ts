/** DTOs mirroring the /api/v1 JSON bodies. */

export interface ColumnInfo {
  name: string;
  kind: 'factor' | 'numeric';
  levels: string[];
}

export interface DatasetInfo {
  name: string;
  n_rows: number;
  columns: ColumnInfo[];
  indicator_columns: string[];
}

export interface DagDoc {
  nodes: string[];
  arcs: [string, string][];
}

export interface StrengthEntry {
  a: string;
  b: string;
  strength: number;
  direction_ab: number;
}

export interface StrengthsDoc {
  nodes: string[];
  iterations: number;
  entries: StrengthEntry[];
}

export interface SessionSummary {
  id: string;
  dataset: DatasetInfo | null;
  assoc: { measure: string; n_edges: number } | null;
  dag: DagDoc | null;
  strengths: StrengthsDoc | null;
  fitted: boolean;
  diagram: DiagramDoc | null;
  history: { event: string; detail: Record<string, unknown> }[];
}

export interface InferenceResult {
  method: 'exact' | 'approximate';
  distribution: Record<string, number>;
  error_bars: Record<string, number> | null;
  repeats: number;
  samples_per_repeat: number;
}

export interface DiagramDoc {
  utility_var: string;
  payoffs: Record<string, number>;
  decision_vars: string[];
}

export interface PolicyRow {
  assignment: Record<string, string>;
  payoff: number;
}

export interface PolicyDoc {
  decision_vars: string[];
  rows: PolicyRow[];
}

export interface JobStatus {
  job: string;
  status: 'running' | 'done' | 'failed' | 'cancelled';
  done: number;
  total: number;
  error?: string;
  dag?: DagDoc;
  strengths?: StrengthsDoc | null;
}

export interface ApiError {
  code: string;
  message: string;
  detail: { cycle?: string[] } & Record<string, unknown>;
}

/** Cpt rows are indexed by parent configuration, last parent fastest. */
export interface CptDoc {
  node: string;
  parents: string[];
  levels: string[];
  parent_levels: string[][];
  table: number[][];
}

export interface ModelDoc {
  format: string;
  version: number;
  nodes: string[];
  arcs: [string, string][];
  strengths: StrengthsDoc | null;
  fitted: { dag: DagDoc; cpts: CptDoc[]; fit_method: string; iss: number } | null;
}

export interface BundleManifest {
  format: string;
  version: number;
  name: string;
  readonly: boolean;
  nodes: string[];
  files: { model: string; marginals: string };
}
