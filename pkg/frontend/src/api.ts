import type {
  ApiError, DiagramDoc, InferenceResult, JobStatus, PolicyDoc, SessionSummary,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServerError extends Error {
  constructor(public readonly body: ApiError, public readonly status: number) {
    super(body.message);
  }
}

/** Thin typed client over /api/v1; every number shown in the UI flows
 * through here (or through an embedded bundle's local engine). */
export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
    private readonly base: string = '/api/v1',
  ) {}

  private async json<T>(url: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + url, init);
    const text = await res.text();
    const body = text ? JSON.parse(text) : null;
    if (!res.ok) {
      throw new ServerError(body as ApiError, res.status);
    }
    return body as T;
  }

  private post<T>(url: string, payload?: unknown): Promise<T> {
    return this.json<T>(url, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload ?? {}),
    });
  }

  createSession(): Promise<{ id: string }> {
    return this.post('/sessions');
  }

  session(id: string): Promise<SessionSummary> {
    return this.json(`/sessions/${id}`);
  }

  async uploadDataset(id: string, file: Blob, name: string, options: {
    delimiter?: string; header?: boolean; factor_level_threshold?: number;
  } = {}): Promise<unknown> {
    const form = new FormData();
    form.append('file', file, name);
    if (options.delimiter) form.append('delimiter', options.delimiter);
    if (options.header !== undefined) form.append('header', String(options.header));
    if (options.factor_level_threshold !== undefined) {
      form.append('factor_level_threshold', String(options.factor_level_threshold));
    }
    const res = await this.fetchFn(`${this.base}/sessions/${id}/dataset`, {
      method: 'POST', body: form,
    });
    const body = await res.json();
    if (!res.ok) throw new ServerError(body as ApiError, res.status);
    return body;
  }

  preprocess(id: string, body: Record<string, unknown>): Promise<unknown> {
    return this.post(`/sessions/${id}/preprocess`, body);
  }

  summary(id: string, column: string): Promise<{ column: string; counts: Record<string, number> }> {
    return this.json(`/sessions/${id}/summary/${encodeURIComponent(column)}`);
  }

  buildAssoc(id: string, measure: string, threshold: number):
      Promise<{ nodes: string[]; edges: [string, string, number][] }> {
    return this.post(`/sessions/${id}/assoc`, { measure, threshold });
  }

  communities(id: string, linkage: string):
      Promise<{ partition_density: number; communities: [string, string, number][] }> {
    return this.post(`/sessions/${id}/assoc/communities`, { linkage });
  }

  learn(id: string, body: Record<string, unknown>): Promise<{ job: string }> {
    return this.post(`/sessions/${id}/structure/learn`, body);
  }

  job(id: string, job: string): Promise<JobStatus> {
    return this.json(`/sessions/${id}/jobs/${job}`);
  }

  cancelJob(id: string, job: string): Promise<unknown> {
    return this.json(`/sessions/${id}/jobs/${job}`, { method: 'DELETE' });
  }

  rethreshold(id: string, edge: number, direction: number): Promise<{ dag: unknown }> {
    return this.post(`/sessions/${id}/structure/threshold`,
      { edge_threshold: edge, direction_threshold: direction });
  }

  edit(id: string, op: 'add' | 'remove' | 'reverse', from: string, to: string):
      Promise<{ dag: unknown }> {
    return this.post(`/sessions/${id}/structure/edit`, { op, from, to });
  }

  importEdgelist(id: string, csv: string): Promise<{ dag: unknown }> {
    return this.post(`/sessions/${id}/structure/import`, { csv });
  }

  fit(id: string, method = 'bayes', iss = 1.0): Promise<unknown> {
    return this.post(`/sessions/${id}/fit`, { method, iss });
  }

  query(id: string, event: string, evidence: Record<string, string>,
        options: { method?: string; repeats?: number; samples_per_repeat?: number;
                   seed?: number } = {}): Promise<InferenceResult> {
    return this.post(`/sessions/${id}/query`, { event, evidence, ...options });
  }

  buildDecision(id: string, body: DiagramDoc): Promise<DiagramDoc> {
    return this.post(`/sessions/${id}/decision`, body);
  }

  policy(id: string, body: Record<string, unknown> = {}): Promise<PolicyDoc> {
    return this.post(`/sessions/${id}/decision/policy`, body);
  }

  async publish(id: string, name: string): Promise<Blob> {
    const res = await this.fetchFn(`${this.base}/sessions/${id}/publish`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ name }),
    });
    if (!res.ok) throw new ServerError(await res.json() as ApiError, res.status);
    return res.blob();
  }

  exportUrl(id: string, artifact: string): string {
    return `${this.base}/sessions/${id}/export/${artifact}`;
  }
}
