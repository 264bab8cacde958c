import { LocalEngine } from './localinfer.js';
import type { BundleManifest, InferenceResult, ModelDoc, StrengthsDoc } from './types.js';

/** A loaded dashboard bundle: the embedded model plus a local query engine.
 * All interaction is read-only; nothing ever posts back anywhere. */
export interface BundleSession {
  readonly: true;
  name: string;
  nodes: string[];
  arcs: [string, string][];
  strengths: StrengthsDoc | null;
  marginals: Record<string, Record<string, number>>;
  levelsOf: (node: string) => string[];
  query: (event: string, evidence: Record<string, string>) => Promise<InferenceResult>;
}

export async function loadBundle(
  fetchFn: (url: string) => Promise<Response> = (u) => fetch(u),
  baseUrl = '.',
): Promise<BundleSession> {
  const manifest = await (await fetchFn(`${baseUrl}/manifest.json`)).json() as BundleManifest;
  if (manifest.format !== 'cbench-dashboard') {
    throw new Error('not a dashboard bundle');
  }
  const model = await (await fetchFn(`${baseUrl}/${manifest.files.model}`)).json() as ModelDoc;
  const marginals = await (await fetchFn(`${baseUrl}/${manifest.files.marginals}`)).json() as
    Record<string, Record<string, number>>;
  const engine = new LocalEngine(model);
  return {
    readonly: true,
    name: manifest.name,
    nodes: model.nodes,
    arcs: model.arcs,
    strengths: model.strengths,
    marginals,
    levelsOf: (node) => engine.levelsOf(node),
    query: async (event, evidence) => engine.query(event, evidence),
  };
}

/** True when the page is being served out of an exported bundle. */
export async function detectBundle(
  fetchFn: (url: string) => Promise<Response> = (u) => fetch(u),
): Promise<boolean> {
  try {
    const res = await fetchFn('./manifest.json');
    if (!res.ok) return false;
    const doc = await res.json();
    return doc?.format === 'cbench-dashboard';
  } catch {
    return false;
  }
}
