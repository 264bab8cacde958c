import type { CptDoc, InferenceResult, ModelDoc } from './types.js';

/** Discrete factor, row-major with the last variable varying fastest. */
interface Factor {
  vars: string[];
  card: number[];
  values: Float64Array;
}

function cptFactor(cpt: CptDoc): Factor {
  const vars = [...cpt.parents, cpt.node];
  const card = [...cpt.parent_levels.map((p) => p.length), cpt.levels.length];
  const values = new Float64Array(cpt.table.length * cpt.levels.length);
  cpt.table.forEach((row, j) => {
    row.forEach((p, k) => { values[j * cpt.levels.length + k] = p; });
  });
  return { vars, card, values };
}

function strides(card: number[]): number[] {
  const out = new Array<number>(card.length);
  let acc = 1;
  for (let i = card.length - 1; i >= 0; i -= 1) {
    out[i] = acc;
    acc *= card[i];
  }
  return out;
}

function multiply(a: Factor, b: Factor): Factor {
  const vars = [...a.vars];
  const card = [...a.card];
  for (let i = 0; i < b.vars.length; i += 1) {
    if (!vars.includes(b.vars[i])) {
      vars.push(b.vars[i]);
      card.push(b.card[i]);
    }
  }
  const size = card.reduce((x, y) => x * y, 1);
  const st = strides(card);
  const mapTo = (f: Factor) => f.vars.map(() => 0).map((_, i) => vars.indexOf(f.vars[i]));
  const aMap = mapTo(a);
  const bMap = mapTo(b);
  const aSt = strides(a.card);
  const bSt = strides(b.card);
  const values = new Float64Array(size);
  const assign = new Array<number>(vars.length).fill(0);
  for (let idx = 0; idx < size; idx += 1) {
    let rem = idx;
    for (let i = 0; i < vars.length; i += 1) {
      assign[i] = Math.floor(rem / st[i]);
      rem %= st[i];
    }
    let ai = 0;
    for (let i = 0; i < aMap.length; i += 1) ai += assign[aMap[i]] * aSt[i];
    let bi = 0;
    for (let i = 0; i < bMap.length; i += 1) bi += assign[bMap[i]] * bSt[i];
    values[idx] = a.values[ai] * b.values[bi];
  }
  return { vars, card, values };
}

function sumOut(f: Factor, name: string): Factor {
  const axis = f.vars.indexOf(name);
  if (axis < 0) return f;
  const vars = f.vars.filter((_, i) => i !== axis);
  const card = f.card.filter((_, i) => i !== axis);
  const size = card.reduce((x, y) => x * y, 1);
  const values = new Float64Array(size);
  const st = strides(f.card);
  const outSt = strides(card);
  for (let idx = 0; idx < f.values.length; idx += 1) {
    let rem = idx;
    let out = 0;
    let oi = 0;
    for (let i = 0; i < f.vars.length; i += 1) {
      const v = Math.floor(rem / st[i]);
      rem %= st[i];
      if (i !== axis) {
        out += v * outSt[oi];
        oi += 1;
      }
    }
    values[out] += f.values[idx];
  }
  return { vars, card, values };
}

function restrict(f: Factor, name: string, index: number): Factor {
  const axis = f.vars.indexOf(name);
  if (axis < 0) return f;
  const vars = f.vars.filter((_, i) => i !== axis);
  const card = f.card.filter((_, i) => i !== axis);
  const size = card.reduce((x, y) => x * y, 1);
  const values = new Float64Array(size);
  const st = strides(f.card);
  const outSt = strides(card);
  for (let idx = 0; idx < f.values.length; idx += 1) {
    let rem = idx;
    let out = 0;
    let oi = 0;
    let keep = true;
    for (let i = 0; i < f.vars.length; i += 1) {
      const v = Math.floor(rem / st[i]);
      rem %= st[i];
      if (i === axis) {
        if (v !== index) keep = false;
      } else {
        out += v * outSt[oi];
        oi += 1;
      }
    }
    if (keep) values[out] += f.values[idx];
  }
  return { vars, card, values };
}

/** Variable elimination over a bundle's fitted model; mirrors the server's
 * exact engine so read-only dashboards can answer queries offline. */
export class LocalEngine {
  private readonly cpts = new Map<string, CptDoc>();

  readonly nodes: string[];

  constructor(model: ModelDoc) {
    if (!model.fitted) {
      throw new Error('bundle model has no fitted parameters');
    }
    this.nodes = model.nodes;
    for (const cpt of model.fitted.cpts) {
      this.cpts.set(cpt.node, cpt);
    }
  }

  levelsOf(node: string): string[] {
    const cpt = this.cpts.get(node);
    if (!cpt) throw new Error(`unknown node ${node}`);
    return cpt.levels;
  }

  query(event: string, evidence: Record<string, string>): InferenceResult {
    const eventCpt = this.cpts.get(event);
    if (!eventCpt) throw new Error(`unknown event node ${event}`);
    const evIdx = new Map<string, number>();
    for (const [node, level] of Object.entries(evidence)) {
      const idx = this.levelsOf(node).indexOf(level);
      if (idx < 0) throw new Error(`${level} is not a level of ${node}`);
      evIdx.set(node, idx);
    }
    let factors: Factor[] = [];
    for (const node of this.nodes) {
      let f = cptFactor(this.cpts.get(node)!);
      for (const [n, idx] of evIdx) {
        f = restrict(f, n, idx);
      }
      factors.push(f);
    }
    // eliminate by ascending current degree, a cheap min-degree heuristic
    const toEliminate = this.nodes.filter((n) => n !== event && !evIdx.has(n));
    while (toEliminate.length > 0) {
      toEliminate.sort((x, y) => {
        const deg = (v: string) => factors.filter((f) => f.vars.includes(v))
          .reduce((acc, f) => acc + f.vars.length, 0);
        return deg(x) - deg(y) || (x < y ? -1 : 1);
      });
      const v = toEliminate.shift()!;
      const involved = factors.filter((f) => f.vars.includes(v));
      factors = factors.filter((f) => !f.vars.includes(v));
      if (involved.length > 0) {
        let prod = involved[0];
        for (let i = 1; i < involved.length; i += 1) prod = multiply(prod, involved[i]);
        factors.push(sumOut(prod, v));
      }
    }
    let final = factors[0];
    for (let i = 1; i < factors.length; i += 1) final = multiply(final, factors[i]);
    if (final.vars.length !== 1 || final.vars[0] !== event) {
      throw new Error('elimination left unexpected variables');
    }
    let total = 0;
    for (const v of final.values) total += v;
    if (!(total > 0)) throw new Error('impossible evidence');
    const distribution: Record<string, number> = {};
    this.levelsOf(event).forEach((lv, i) => {
      distribution[lv] = final.values[i] / total;
    });
    return {
      method: 'exact', distribution, error_bars: null,
      repeats: 1, samples_per_repeat: 0,
    };
  }
}
