"""Parameter fitting on a fixed DAG and probabilistic queries.

Exact queries run variable elimination with min-fill ordering; approximate
queries run likelihood weighting, repeated to yield per-level error bars.
Fitted networks are immutable and safe to share.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import Column, Dataset
from .errors import ColumnError, EvidenceError
from .graph import Dag

EXACT_NODE_LIMIT = 30  # default routing: exact at or below, sampling above


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table: rows indexed by parent configuration.

    ``table`` has shape (prod(parent level counts), len(levels)); the parent
    configuration index counts parents in the declared order, last parent
    varying fastest.
    """

    node: str
    parents: tuple[str, ...]
    levels: tuple[str, ...]
    parent_levels: tuple[tuple[str, ...], ...]
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.float64)
        q = int(np.prod([len(p) for p in self.parent_levels])) if self.parents else 1
        if t.shape != (q, len(self.levels)):
            raise ColumnError(f"cpt for {self.node!r}: table shape {t.shape} != {(q, len(self.levels))}")
        if (t < 0).any():
            raise ColumnError(f"cpt for {self.node!r}: negative probability")
        if not np.allclose(t.sum(axis=1), 1.0, atol=1e-9):
            raise ColumnError(f"cpt for {self.node!r}: rows must sum to 1")
        object.__setattr__(self, "table", t)

    def to_json(self) -> dict:
        return {"node": self.node, "parents": list(self.parents),
                "levels": list(self.levels),
                "parent_levels": [list(p) for p in self.parent_levels],
                "table": self.table.tolist()}

    @staticmethod
    def from_json(doc: dict) -> "Cpt":
        return Cpt(doc["node"], tuple(doc["parents"]), tuple(doc["levels"]),
                   tuple(tuple(p) for p in doc["parent_levels"]),
                   np.asarray(doc["table"], dtype=np.float64))


@dataclass(frozen=True)
class FittedBn:
    dag: Dag
    cpts: dict[str, Cpt]
    fit_method: str = "bayes"
    iss: float = 1.0

    def __post_init__(self):
        for v in self.dag.nodes:
            cpt = self.cpts.get(v)
            if cpt is None:
                raise ColumnError(f"missing cpt for node {v!r}")
            if cpt.parents != self.dag.parents(v):
                raise ColumnError(f"cpt parents for {v!r} do not match the dag")

    def levels(self, node: str) -> tuple[str, ...]:
        return self.cpts[node].levels

    def to_json(self) -> dict:
        return {"dag": self.dag.to_json(), "fit_method": self.fit_method, "iss": self.iss,
                "cpts": [self.cpts[v].to_json() for v in self.dag.nodes]}

    @staticmethod
    def from_json(doc: dict) -> "FittedBn":
        dag = Dag.from_json(doc["dag"])
        cpts = {c["node"]: Cpt.from_json(c) for c in doc["cpts"]}
        return FittedBn(dag, cpts, doc.get("fit_method", "bayes"), float(doc.get("iss", 1.0)))


@dataclass(frozen=True)
class Query:
    event: str
    evidence: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.event in self.evidence:
            raise EvidenceError("event cannot also be evidence")


@dataclass(frozen=True)
class InferenceResult:
    method: str  # "exact" | "approximate"
    distribution: dict[str, float]
    error_bars: dict[str, float] | None = None
    repeats: int = 1
    samples_per_repeat: int = 0

    def to_json(self) -> dict:
        return {"method": self.method, "distribution": self.distribution,
                "error_bars": self.error_bars, "repeats": self.repeats,
                "samples_per_repeat": self.samples_per_repeat}


# -- fitting ---------------------------------------------------------------------

def fit(ds: Dataset, g: Dag, method: str = "bayes", iss: float = 1.0) -> FittedBn:
    """Estimate one CPT per node.

    mle: relative frequencies, uniform rows for unseen parent configs.
    bayes: Dirichlet posterior mean with imaginary sample size spread
    uniformly over the (config, level) cells.
    """
    if method not in ("mle", "bayes"):
        raise ColumnError(f"unknown fit method {method!r}")
    for v in g.nodes:
        if not ds.has_column(v):
            raise ColumnError(f"dag node {v!r} missing from dataset")
        if ds.column(v).kind != "factor":
            raise ColumnError(f"dag node {v!r} is not a factor column")
    cpts: dict[str, Cpt] = {}
    for v in g.nodes:
        parents = g.parents(v)
        child = ds.column(v)
        r = len(child.levels)
        plevels = tuple(tuple(ds.column(p).levels) for p in parents)
        q = int(np.prod([len(p) for p in plevels])) if parents else 1
        keep = child.values >= 0
        config = np.zeros(ds.n_rows, dtype=np.int64)
        for p in parents:
            pc = ds.column(p)
            keep &= pc.values >= 0
            config = config * len(pc.levels) + np.maximum(pc.values, 0)
        flat = np.bincount(config[keep] * r + child.values[keep], minlength=q * r)
        counts = flat.reshape(q, r).astype(float)
        if method == "mle":
            n_j = counts.sum(axis=1, keepdims=True)
            with np.errstate(invalid="ignore"):
                table = counts / n_j
            table[n_j[:, 0] == 0] = 1.0 / r
        else:
            a_jk = iss / (r * q)
            table = (counts + a_jk) / (counts.sum(axis=1, keepdims=True) + iss / q)
        cpts[v] = Cpt(v, parents, tuple(child.levels), plevels, table)
    return FittedBn(g, cpts, method, iss)


def export_cpts_csv(bn: FittedBn) -> bytes:
    """CSV rows: node, parent config (pipe-joined name=level), level, probability."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", "parents", "level", "probability"])
    for v in bn.dag.nodes:
        cpt = bn.cpts[v]
        q = cpt.table.shape[0]
        for j in range(q):
            config = _config_labels(cpt, j)
            ctext = "|".join(f"{p}={lv}" for p, lv in zip(cpt.parents, config))
            for k, lv in enumerate(cpt.levels):
                w.writerow([v, ctext, lv, repr(float(cpt.table[j, k]))])
    return buf.getvalue().encode("utf-8")


def _config_labels(cpt: Cpt, j: int) -> list[str]:
    labels = []
    for dims in reversed(cpt.parent_levels):
        labels.append(dims[j % len(dims)])
        j //= len(dims)
    return list(reversed(labels))


def _config_index(cpt: Cpt, assignment: dict[str, int]) -> int:
    j = 0
    for p, dims in zip(cpt.parents, cpt.parent_levels):
        j = j * len(dims) + assignment[p]
    return j


def _level_index(bn: FittedBn, node: str, level: str) -> int:
    levels = bn.levels(node)
    try:
        return levels.index(level)
    except ValueError:
        raise EvidenceError(f"{level!r} is not a level of {node!r}")


# -- exact inference: variable elimination ----------------------------------------

class _Factor:
    __slots__ = ("vars", "array")

    def __init__(self, vars_: tuple[str, ...], array: np.ndarray):
        self.vars = vars_
        self.array = array

    def reduce(self, node: str, idx: int) -> "_Factor":
        if node not in self.vars:
            return self
        ax = self.vars.index(node)
        taken = np.take(self.array, idx, axis=ax)
        return _Factor(self.vars[:ax] + self.vars[ax + 1:], taken)


def _multiply(factors: list[_Factor]) -> _Factor:
    all_vars: list[str] = []
    for f in factors:
        for v in f.vars:
            if v not in all_vars:
                all_vars.append(v)
    out = None
    for f in factors:
        shape = [1] * len(all_vars)
        perm = [f.vars.index(v) for v in all_vars if v in f.vars]
        arr = np.transpose(f.array, perm) if f.vars else f.array
        for i, v in enumerate(all_vars):
            if v in f.vars:
                shape[i] = arr.shape[[v2 for v2 in all_vars if v2 in f.vars].index(v)]
        arr = arr.reshape(shape)
        out = arr if out is None else out * arr
    return _Factor(tuple(all_vars), out if out is not None else np.array(1.0))


def _sum_out(f: _Factor, node: str) -> _Factor:
    ax = f.vars.index(node)
    return _Factor(f.vars[:ax] + f.vars[ax + 1:], f.array.sum(axis=ax))


def _cpt_factor(bn: FittedBn, v: str) -> _Factor:
    cpt = bn.cpts[v]
    dims = [len(p) for p in cpt.parent_levels] + [len(cpt.levels)]
    arr = cpt.table.reshape(dims)
    return _Factor(cpt.parents + (v,), arr)


def _min_fill_order(nodes, factor_vars: list[set], node_order: dict[str, int]) -> list[str]:
    """Elimination order greedily minimizing fill-in edges, ties by node order."""
    adj: dict[str, set[str]] = {v: set() for v in nodes}
    for vs in factor_vars:
        for a in vs:
            if a in adj:
                adj[a] |= (vs & set(adj)) - {a}
    remaining = set(nodes)
    order = []
    while remaining:
        best, best_fill = None, None
        for v in sorted(remaining, key=lambda x: node_order[x]):
            nbrs = adj[v] & remaining
            fill = sum(1 for a in nbrs for b in nbrs
                       if a < b and b not in adj[a])
            if best_fill is None or fill < best_fill:
                best, best_fill = v, fill
        nbrs = adj[best] & remaining
        for a in nbrs:
            adj[a] |= nbrs - {a}
        remaining.discard(best)
        order.append(best)
    return order


def exact_query(bn: FittedBn, q: Query) -> InferenceResult:
    """P(event | evidence) by variable elimination; errors on impossible evidence."""
    if q.event not in bn.cpts:
        raise ColumnError(f"unknown event node {q.event!r}")
    ev_idx = {n: _level_index(bn, n, lv) for n, lv in q.evidence.items()}
    factors = []
    for v in bn.dag.nodes:
        f = _cpt_factor(bn, v)
        for n, idx in ev_idx.items():
            f = f.reduce(n, idx)
        factors.append(f)
    node_order = {v: i for i, v in enumerate(bn.dag.nodes)}
    to_eliminate = [v for v in bn.dag.nodes if v != q.event and v not in ev_idx]
    order = _min_fill_order(to_eliminate, [set(f.vars) for f in factors], node_order)
    for v in order:
        involved = [f for f in factors if v in f.vars]
        rest = [f for f in factors if v not in f.vars]
        factors = rest + [_sum_out(_multiply(involved), v)] if involved else rest
    final = _multiply(factors)
    if final.vars != (q.event,):
        # event var may sit on a different axis; normalize representation
        ax = final.vars.index(q.event)
        arr = np.moveaxis(final.array, ax, -1).reshape(-1, final.array.shape[ax]).sum(axis=0)
    else:
        arr = final.array
    total = float(arr.sum())
    if total <= 0 or not np.isfinite(total):
        raise EvidenceError("impossible evidence")
    dist = arr / total
    levels = bn.levels(q.event)
    return InferenceResult("exact", {lv: float(p) for lv, p in zip(levels, dist)})


# -- approximate inference: likelihood weighting -----------------------------------

def _sample_rows(bn: FittedBn, n: int, rng, clamp: dict[str, int] | None = None,
                 weight_evidence: dict[str, int] | None = None):
    """Vectorized topological sampling.

    ``clamp`` fixes nodes without weighting (interventions); ``weight_evidence``
    fixes nodes and accumulates the likelihood-weighting factors. Returns
    (samples dict node -> int codes, weights array).
    """
    clamp = clamp or {}
    weight_evidence = weight_evidence or {}
    samples: dict[str, np.ndarray] = {}
    weights = np.ones(n)
    for v in bn.dag.topological_order():
        cpt = bn.cpts[v]
        if cpt.parents:
            config = np.zeros(n, dtype=np.int64)
            for p, dims in zip(cpt.parents, cpt.parent_levels):
                config = config * len(dims) + samples[p]
            rows = cpt.table[config]
        else:
            rows = np.broadcast_to(cpt.table[0], (n, len(cpt.levels)))
        if v in clamp:
            samples[v] = np.full(n, clamp[v], dtype=np.int64)
        elif v in weight_evidence:
            k = weight_evidence[v]
            weights = weights * rows[:, k]
            samples[v] = np.full(n, k, dtype=np.int64)
        else:
            u = rng.random(n)
            cum = np.cumsum(rows, axis=1)
            samples[v] = np.minimum(
                (u[:, None] > cum).sum(axis=1), len(cpt.levels) - 1).astype(np.int64)
    return samples, weights


def approx_query(bn: FittedBn, q: Query, samples_per_repeat: int = 10000,
                 repeats: int = 30, seed: int = 0) -> InferenceResult:
    """Likelihood weighting, repeated with derived seeds.

    Reports the mean distribution over repeats and the per-level standard
    deviation across repeats (zero by convention when repeats == 1).
    """
    if q.event not in bn.cpts:
        raise ColumnError(f"unknown event node {q.event!r}")
    ev_idx = {n: _level_index(bn, n, lv) for n, lv in q.evidence.items()}
    levels = bn.levels(q.event)
    estimates = np.zeros((repeats, len(levels)))
    for rep in range(repeats):
        rng = np.random.default_rng([seed, rep])
        samples, weights = _sample_rows(bn, samples_per_repeat, rng,
                                        weight_evidence=ev_idx)
        total = float(weights.sum())
        if total <= 0:
            raise EvidenceError("evidence unreachable")
        ev = samples[q.event]
        for k in range(len(levels)):
            estimates[rep, k] = float(weights[ev == k].sum()) / total
    mean = estimates.mean(axis=0)
    sd = estimates.std(axis=0, ddof=1) if repeats > 1 else np.zeros(len(levels))
    return InferenceResult(
        "approximate",
        {lv: float(p) for lv, p in zip(levels, mean)},
        {lv: float(s) for lv, s in zip(levels, sd)},
        repeats, samples_per_repeat)


def query(bn: FittedBn, q: Query, method: str = "auto", samples_per_repeat: int = 10000,
          repeats: int = 30, seed: int = 0) -> InferenceResult:
    """Route a (possibly multi-evidence) query to exact or approximate inference.

    auto picks exact for networks at or below the node limit, sampling above.
    """
    if method == "auto":
        method = "exact" if len(bn.dag.nodes) <= EXACT_NODE_LIMIT else "approximate"
    if method == "exact":
        return exact_query(bn, q)
    if method == "approximate":
        return approx_query(bn, q, samples_per_repeat, repeats, seed)
    raise ColumnError(f"unknown inference method {method!r}")


def sample(bn: FittedBn, n: int, seed: int = 0, name: str = "sampled",
           clamp: dict[str, str] | None = None) -> Dataset:
    """Ancestral sampling into a factor-typed Dataset; deterministic per seed."""
    rng = np.random.default_rng(seed)
    clamp_idx = {v: _level_index(bn, v, lv) for v, lv in (clamp or {}).items()}
    draws, _ = _sample_rows(bn, n, rng, clamp=clamp_idx)
    cols = tuple(Column(v, "factor", draws[v], bn.levels(v)) for v in bn.dag.nodes)
    return Dataset(name, cols)
