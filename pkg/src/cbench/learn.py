"""Structure learning: score-based search, constraint-based learners, Chow-Liu
trees, bootstrap model averaging and cross-validated model checks.

Search is deterministic per seed: operators are ranked by score delta with a
fixed add < delete < reverse, lexicographic-arc tie-break, and per-iteration
bootstrap seeds derive as seed + i so strength tables never depend on the
worker count.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import multiprocessing as mp

import numpy as np

from .dataset import Dataset
from .errors import ColumnError, ConstraintError
from .graph import ArcConstraints, Dag, consistent_extension, random_dag, to_cpdag, Cpdag
from .inference import fit
from .scores import LocalScoreCache, ScoreSpec, ci_test, network_score

ALGORITHMS = ("hc", "tabu", "gs", "pc_stable", "chow_liu")
SCORE_BASED = ("hc", "tabu")

_EPS = 1e-9  # score deltas below this count as non-improving


@dataclass(frozen=True)
class SearchConfig:
    algorithm: str = "hc"
    score: ScoreSpec = field(default_factory=ScoreSpec)
    constraints: ArcConstraints = field(default_factory=ArcConstraints)
    start: Dag | None = None
    max_parents: int | None = None
    tabu_length: int = 10
    restarts: int = 0
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ColumnError(f"unknown algorithm {self.algorithm!r}")
        if self.start is not None:
            for a in self.start.arcs:
                if a in self.constraints.blacklist:
                    raise ConstraintError(f"start graph contains blacklisted arc {a}")

    def to_json(self) -> dict:
        return {"algorithm": self.algorithm, "score": self.score.to_json(),
                "constraints": self.constraints.to_json(),
                "start": self.start.to_json() if self.start else None,
                "max_parents": self.max_parents, "tabu_length": self.tabu_length,
                "restarts": self.restarts, "alpha": self.alpha, "seed": self.seed}

    @staticmethod
    def from_json(doc: dict) -> "SearchConfig":
        return SearchConfig(
            algorithm=doc.get("algorithm", "hc"),
            score=ScoreSpec.from_json(doc.get("score", {})),
            constraints=ArcConstraints.from_json(doc.get("constraints", {})),
            start=Dag.from_json(doc["start"]) if doc.get("start") else None,
            max_parents=doc.get("max_parents"),
            tabu_length=doc.get("tabu_length", 10),
            restarts=doc.get("restarts", 0),
            alpha=doc.get("alpha", 0.05),
            seed=doc.get("seed", 0))


@dataclass(frozen=True)
class BootstrapConfig:
    iterations: int = 51
    sample_fraction: float = 1.0
    resample: bool = True
    edge_threshold: float = 0.5
    direction_threshold: float = 0.5
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.iterations < 1:
            raise ColumnError("iterations must be >= 1")
        if not (0.0 < self.sample_fraction <= 1.0):
            raise ColumnError("sample_fraction must be in (0, 1]")

    def to_json(self) -> dict:
        return {"iterations": self.iterations, "sample_fraction": self.sample_fraction,
                "resample": self.resample, "edge_threshold": self.edge_threshold,
                "direction_threshold": self.direction_threshold,
                "seed": self.seed, "workers": self.workers}

    @staticmethod
    def from_json(doc: dict) -> "BootstrapConfig":
        return BootstrapConfig(
            iterations=doc.get("iterations", 51),
            sample_fraction=doc.get("sample_fraction", 1.0),
            resample=doc.get("resample", True),
            edge_threshold=doc.get("edge_threshold", 0.5),
            direction_threshold=doc.get("direction_threshold", 0.5),
            seed=doc.get("seed", 0),
            workers=doc.get("workers", 1))


@dataclass(frozen=True)
class StrengthTable:
    """Bootstrap edge strengths and direction confidences.

    ``entries`` maps the canonical pair (a, b), a < b, to
    (strength, direction of a -> b); direction(b -> a) = 1 - direction(a -> b).
    """

    nodes: tuple[str, ...]
    entries: dict[tuple[str, str], tuple[float, float]]
    iterations: int = 0

    def strength(self, a: str, b: str) -> float:
        key = (a, b) if a < b else (b, a)
        return self.entries.get(key, (0.0, 0.5))[0]

    def direction(self, a: str, b: str) -> float:
        key = (a, b) if a < b else (b, a)
        s, d = self.entries.get(key, (0.0, 0.5))
        if s == 0.0:
            return 0.5
        return d if key == (a, b) else 1.0 - d

    def to_json(self) -> dict:
        return {"nodes": list(self.nodes), "iterations": self.iterations,
                "entries": [{"a": a, "b": b, "strength": s, "direction_ab": d}
                            for (a, b), (s, d) in sorted(self.entries.items())]}

    @staticmethod
    def from_json(doc: dict) -> "StrengthTable":
        entries = {(e["a"], e["b"]): (float(e["strength"]), float(e["direction_ab"]))
                   for e in doc.get("entries", [])}
        return StrengthTable(tuple(doc["nodes"]), entries, int(doc.get("iterations", 0)))


@dataclass(frozen=True)
class ValidationReport:
    mean_loss: float
    per_variable_loss: dict[str, float]
    heldout_score: float
    folds: int

    def to_json(self) -> dict:
        return {"mean_loss": self.mean_loss, "per_variable_loss": self.per_variable_loss,
                "heldout_score": self.heldout_score, "folds": self.folds}


# -- greedy search machinery -------------------------------------------------------

def _arc_hash(a: str, b: str) -> int:
    digest = hashlib.blake2b(f"{a}\x00{b}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class _SearchState:
    """Mutable parent-set view of a DAG during greedy search."""

    def __init__(self, nodes: list[str], arcs):
        self.nodes = list(nodes)
        self.parents: dict[str, set[str]] = {v: set() for v in nodes}
        self.hash = 0
        for a, b in arcs:
            self.parents[b].add(a)
            self.hash ^= _arc_hash(a, b)

    def arcs(self):
        return {(p, v) for v, ps in self.parents.items() for p in ps}

    def descendants(self) -> dict[str, set[str]]:
        children: dict[str, list[str]] = {v: [] for v in self.nodes}
        for v, ps in self.parents.items():
            for p in ps:
                children[p].append(v)
        indeg = {v: len(self.parents[v]) for v in self.nodes}
        order, ready = [], [v for v in self.nodes if indeg[v] == 0]
        while ready:
            v = ready.pop()
            order.append(v)
            for w in children[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        desc: dict[str, set[str]] = {}
        for v in reversed(order):
            acc: set[str] = set()
            for w in children[v]:
                acc.add(w)
                acc |= desc[w]
            desc[v] = acc
        return desc

    def apply(self, op):
        kind, u, v = op
        if kind == "add":
            self.parents[v].add(u)
            self.hash ^= _arc_hash(u, v)
        elif kind == "delete":
            self.parents[v].discard(u)
            self.hash ^= _arc_hash(u, v)
        else:  # reverse
            self.parents[v].discard(u)
            self.parents[u].add(v)
            self.hash ^= _arc_hash(u, v) ^ _arc_hash(v, u)

    def to_dag(self) -> Dag:
        return Dag(tuple(self.nodes), tuple(sorted(self.arcs())))


_OP_RANK = {"add": 0, "delete": 1, "reverse": 2}


def _candidate_ops(state: _SearchState, constraints: ArcConstraints,
                   max_parents: int | None):
    """Valid operators on the current structure, honoring constraints,
    the parent cap and acyclicity."""
    desc = state.descendants()
    ops = []
    for u in state.nodes:
        for v in state.nodes:
            if u == v:
                continue
            if u in state.parents[v]:
                if (u, v) not in constraints.whitelist:
                    ops.append(("delete", u, v))
                    if ((v, u) not in constraints.blacklist
                            and (max_parents is None or len(state.parents[u]) < max_parents)
                            and not _path_avoiding(state, u, v)):
                        ops.append(("reverse", u, v))
            else:
                if ((u, v) not in constraints.blacklist
                        and (max_parents is None or len(state.parents[v]) < max_parents)
                        and u not in desc[v]):
                    ops.append(("add", u, v))
    return ops


def _path_avoiding(state: _SearchState, u: str, v: str) -> bool:
    """True if u reaches v by a directed path other than the arc u -> v."""
    children: dict[str, list[str]] = {w: [] for w in state.nodes}
    for w, ps in state.parents.items():
        for p in ps:
            if not (p == u and w == v):
                children[p].append(w)
    stack, seen = [u], {u}
    while stack:
        x = stack.pop()
        for y in children[x]:
            if y == v:
                return True
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False


def _op_delta(state: _SearchState, op, cache: LocalScoreCache) -> float:
    kind, u, v = op
    pv = state.parents[v]
    if kind == "add":
        return cache.local(v, pv | {u}) - cache.local(v, pv)
    if kind == "delete":
        return cache.local(v, pv - {u}) - cache.local(v, pv)
    pu = state.parents[u]
    return (cache.local(v, pv - {u}) - cache.local(v, pv)
            + cache.local(u, pu | {v}) - cache.local(u, pu))


def _best_op(state, cache, constraints, max_parents, forbidden_hashes=None):
    """Highest-delta valid operator; ties break add < delete < reverse, then
    by arc name. Returns (op, delta) or (None, 0.0)."""
    best, best_key = None, None
    for op in _candidate_ops(state, constraints, max_parents):
        if forbidden_hashes is not None:
            kind, u, v = op
            h = state.hash ^ _arc_hash(u, v)
            if kind == "reverse":
                h ^= _arc_hash(v, u)
            if h in forbidden_hashes:
                continue
        delta = _op_delta(state, op, cache)
        key = (-delta, _OP_RANK[op[0]], op[1], op[2])
        if best_key is None or key < best_key:
            best, best_key = op, key
    if best is None:
        return None, 0.0
    return best, -best_key[0]


def _start_state(variables, cfg: SearchConfig) -> _SearchState:
    if cfg.start is not None:
        missing = set(cfg.start.nodes) - set(variables)
        if missing:
            raise ConstraintError(f"start graph has unknown nodes {sorted(missing)}")
        arcs = set(cfg.start.arcs) | cfg.constraints.whitelist
        Dag(tuple(variables), tuple(sorted(arcs)))  # validates acyclicity
        return _SearchState(variables, arcs)
    if cfg.constraints.whitelist:
        return _SearchState(variables, cfg.constraints.whitelist)
    return _SearchState(variables, ())


def _greedy_ascent(state: _SearchState, cache, cfg: SearchConfig) -> None:
    while True:
        op, delta = _best_op(state, cache, cfg.constraints, cfg.max_parents)
        if op is None or delta <= _EPS:
            return
        state.apply(op)


def hill_climb(ds: Dataset, cfg: SearchConfig,
               cache: LocalScoreCache | None = None) -> Dag:
    """Greedy score ascent over add/delete/reverse with optional random restarts."""
    variables = ds.learning_variables()
    cache = cache if cache is not None else LocalScoreCache(ds, cfg.score)
    rng = np.random.default_rng(cfg.seed)
    state = _start_state(variables, cfg)
    _greedy_ascent(state, cache, cfg)
    best = state.to_dag()
    best_score = cache.network(best)
    for _ in range(cfg.restarts):
        n_perturb = 2 * len(variables)
        for _ in range(n_perturb):
            ops = _candidate_ops(state, cfg.constraints, cfg.max_parents)
            if not ops:
                break
            ops.sort(key=lambda op: (_OP_RANK[op[0]], op[1], op[2]))
            state.apply(ops[int(rng.integers(len(ops)))])
        _greedy_ascent(state, cache, cfg)
        candidate = state.to_dag()
        score = cache.network(candidate)
        if score > best_score + _EPS:
            best, best_score = candidate, score
    return best


def tabu(ds: Dataset, cfg: SearchConfig,
         cache: LocalScoreCache | None = None) -> Dag:
    """Greedy search that may take the best non-improving move, keeping a tabu
    list of recently visited structures (arc-set hashes). Stops after
    tabu_length consecutive non-improving moves; returns the best visited."""
    variables = ds.learning_variables()
    cache = cache if cache is not None else LocalScoreCache(ds, cfg.score)
    state = _start_state(variables, cfg)
    current_score = sum(cache.local(v, state.parents[v]) for v in variables)
    best = state.to_dag()
    best_score = current_score
    visited = deque([state.hash], maxlen=max(cfg.tabu_length, 1))
    non_improving = 0
    while non_improving < cfg.tabu_length:
        op, delta = _best_op(state, cache, cfg.constraints, cfg.max_parents,
                             forbidden_hashes=set(visited))
        if op is None:
            break
        state.apply(op)
        current_score += delta
        visited.append(state.hash)
        if current_score > best_score + _EPS:
            best = state.to_dag()
            best_score = current_score
            non_improving = 0
        else:
            non_improving += 1
    return best


# -- constraint-based learners -------------------------------------------------------

def _subsets(items, max_size=None):
    items = sorted(items)
    top = len(items) if max_size is None else min(max_size, len(items))
    for size in range(top + 1):
        yield from itertools.combinations(items, size)


def grow_shrink(ds: Dataset, cfg: SearchConfig) -> Dag:
    """Markov-blanket discovery (grow, then shrink), blanket-AND skeleton with
    spouse elimination, v-structure orientation and Meek-rule closure."""
    variables = ds.learning_variables()
    alpha = cfg.alpha
    blankets: dict[str, set[str]] = {}
    degenerate = {v for v in variables if len(ds.column(v).levels) < 2}
    usable = [v for v in variables if v not in degenerate]
    for x in usable:
        b: list[str] = []
        changed = True
        while changed:
            changed = False
            for y in usable:
                if y == x or y in b:
                    continue
                if ci_test(ds, x, y, b).p_value < alpha:
                    b.append(y)
                    changed = True
        for y in list(b):
            rest = [z for z in b if z != y]
            if ci_test(ds, x, y, rest).p_value >= alpha:
                b.remove(y)
        blankets[x] = set(b)
    skeleton, sepsets = _blanket_skeleton(ds, usable, blankets, alpha)
    return _orient_and_extend(variables, skeleton, sepsets, cfg)


def _blanket_skeleton(ds, variables, blankets, alpha):
    """Resolve blanket members into true neighbors; record separating sets."""
    skeleton: set[frozenset] = set()
    sepsets: dict[frozenset, tuple] = {}
    for x, y in itertools.combinations(variables, 2):
        if y not in blankets[x] or x not in blankets[y]:
            sepsets[frozenset((x, y))] = tuple(sorted(blankets[x] - {y}))
            continue
        pool = blankets[x] - {y}
        if len(blankets[y] - {x}) < len(pool):
            pool = blankets[y] - {x}
        separated = False
        for s in _subsets(pool):
            if ci_test(ds, x, y, s).p_value >= alpha:
                sepsets[frozenset((x, y))] = tuple(s)
                separated = True
                break
        if not separated:
            skeleton.add(frozenset((x, y)))
    return skeleton, sepsets


def pc_stable(ds: Dataset, cfg: SearchConfig) -> Dag:
    """Order-independent PC: level-wise conditioning with neighbor sets frozen
    per level, then v-structures, Meek rules and a consistent extension."""
    variables = ds.learning_variables()
    alpha = cfg.alpha
    pinned = {frozenset(a) for a in cfg.constraints.whitelist}
    adj: dict[str, set[str]] = {v: set() for v in variables}
    for x, y in itertools.combinations(variables, 2):
        if ((x, y) in cfg.constraints.blacklist and (y, x) in cfg.constraints.blacklist
                and frozenset((x, y)) not in pinned):
            continue
        adj[x].add(y)
        adj[y].add(x)
    sepsets: dict[frozenset, tuple] = {}
    level = 0
    while True:
        frozen = {v: set(nbrs) for v, nbrs in adj.items()}
        any_testable = False
        for x, y in itertools.combinations(variables, 2):
            if y not in adj[x] or frozenset((x, y)) in pinned:
                continue
            removed = False
            for side_a, side_b in ((x, y), (y, x)):
                cands = sorted(frozen[side_a] - {side_b})
                if len(cands) < level:
                    continue
                any_testable = True
                for s in itertools.combinations(cands, level):
                    if ci_test(ds, x, y, s).p_value >= alpha:
                        adj[x].discard(y)
                        adj[y].discard(x)
                        sepsets[frozenset((x, y))] = s
                        removed = True
                        break
                if removed:
                    break
        if not any_testable:
            break
        level += 1
    skeleton = {frozenset((x, y)) for x in variables for y in adj[x] if x < y}
    return _orient_and_extend(variables, skeleton, sepsets, cfg)


def _orient_and_extend(variables, skeleton, sepsets, cfg: SearchConfig) -> Dag:
    from .graph import _apply_meek  # shared Meek closure

    directed: set[tuple[str, str]] = set()
    undirected = set(skeleton)
    for z in variables:
        nbrs = sorted({next(iter(e - {z})) for e in skeleton if z in e})
        for x, y in itertools.combinations(nbrs, 2):
            if frozenset((x, y)) in skeleton:
                continue
            sep = sepsets.get(frozenset((x, y)))
            if sep is not None and z not in sep:
                for arc in ((x, z), (y, z)):
                    if arc not in cfg.constraints.blacklist:
                        directed.add(arc)
                        undirected.discard(frozenset(arc))
    # drop conflicting orientations (both directions claimed by v-structures)
    for a, b in list(directed):
        if (b, a) in directed:
            directed.discard((a, b))
            directed.discard((b, a))
            undirected.add(frozenset((a, b)))
    _apply_meek(tuple(variables), directed, undirected)
    cp = Cpdag(tuple(variables), frozenset(directed), frozenset(undirected))
    return consistent_extension(cp, cfg.constraints)


def mutual_information(table: np.ndarray) -> float:
    """Plug-in mutual information of a contingency table (zero cells drop out)."""
    t = np.asarray(table, dtype=float)
    n = t.sum()
    if n == 0:
        return 0.0
    px = t.sum(axis=1) / n
    py = t.sum(axis=0) / n
    p = t / n
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.log(p / np.outer(px, py))
        terms = np.where(p > 0, p * ratio, 0.0)
    return float(terms.sum())


def chow_liu(ds: Dataset) -> Dag:
    """Maximum spanning tree over pairwise mutual information, rooted at the
    first variable and directed away from the root."""
    from .assoc import contingency

    variables = ds.learning_variables()
    if len(variables) < 2:
        return Dag(tuple(variables))
    weights = {}
    for x, y in itertools.combinations(variables, 2):
        weights[(x, y)] = mutual_information(contingency(ds, x, y))
    ranked = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))
    parent = {v: v for v in variables}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    chosen: set[frozenset] = set()
    for (x, y), _ in ranked:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry
            chosen.add(frozenset((x, y)))
            if len(chosen) == len(variables) - 1:
                break
    root = variables[0]
    arcs: list[tuple[str, str]] = []
    seen = {root}
    frontier = [root]
    while frontier:
        v = frontier.pop(0)
        nbrs = sorted({next(iter(e - {v})) for e in chosen if v in e})
        for w in nbrs:
            if w not in seen:
                arcs.append((v, w))
                seen.add(w)
                frontier.append(w)
    return Dag(tuple(variables), tuple(arcs))


def learn_structure(ds: Dataset, cfg: SearchConfig,
                    cache: LocalScoreCache | None = None) -> Dag:
    if cfg.algorithm == "hc":
        return hill_climb(ds, cfg, cache=cache)
    if cfg.algorithm == "tabu":
        return tabu(ds, cfg, cache=cache)
    if cfg.algorithm == "gs":
        return grow_shrink(ds, cfg)
    if cfg.algorithm == "pc_stable":
        return pc_stable(ds, cfg)
    if cfg.algorithm == "chow_liu":
        return chow_liu(ds)
    raise ColumnError(f"unknown algorithm {cfg.algorithm!r}")


# -- bootstrap model averaging ----------------------------------------------------

_WORKER_CTX: dict = {}


def _bootstrap_init(ds, cfg, bcfg):
    _WORKER_CTX["ds"] = ds
    _WORKER_CTX["cfg"] = cfg
    _WORKER_CTX["bcfg"] = bcfg
    # fixed data across iterations -> scores are reusable within the worker
    _WORKER_CTX["cache"] = None if bcfg.resample else LocalScoreCache(ds, cfg.score)


def _bootstrap_one(i: int) -> tuple:
    ds, cfg, bcfg = _WORKER_CTX["ds"], _WORKER_CTX["cfg"], _WORKER_CTX["bcfg"]
    return _run_iteration(ds, cfg, bcfg, i, cache=_WORKER_CTX["cache"])


def _run_iteration(ds: Dataset, cfg: SearchConfig, bcfg: BootstrapConfig, i: int,
                   cache: LocalScoreCache | None = None):
    seed_i = bcfg.seed + i
    if bcfg.resample:
        rng = np.random.default_rng(seed_i)
        n_draw = math.ceil(bcfg.sample_fraction * ds.n_rows)
        idx = rng.integers(0, ds.n_rows, size=n_draw)
        data = ds.select_rows(idx)
        sub = replace(cfg, seed=seed_i)
        cache = None  # counts differ per resample
    else:
        data = ds
        start = random_dag(ds.learning_variables(), cfg.max_parents, seed=seed_i)
        start = Dag(start.nodes, tuple(sorted(
            (set(start.arcs) - set(cfg.constraints.blacklist)) | cfg.constraints.whitelist)))
        sub = replace(cfg, start=start, seed=seed_i)
    dag = learn_structure(data, sub, cache=cache)
    return tuple(dag.arcs)


def bootstrap_learn(ds: Dataset, cfg: SearchConfig,
                    bcfg: BootstrapConfig, progress=None) -> tuple[StrengthTable, list[Dag]]:
    """Repeated structure learning on resampled data (or re-initialized graphs).

    Iterations are independent and fan out over a process pool; per-iteration
    seeds are seed + i, so the strength table is identical for any worker count.
    ``progress`` is an optional callback (done, total) -> bool; returning False
    cancels the run.
    """
    if not bcfg.resample and cfg.algorithm not in SCORE_BASED:
        raise ConstraintError("disabling resampling requires a score-based algorithm")
    variables = ds.learning_variables()
    arcs_per_iter: list[tuple] = [None] * bcfg.iterations
    indices = list(range(1, bcfg.iterations + 1))
    if bcfg.workers > 1:
        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(max_workers=bcfg.workers, mp_context=ctx,
                                 initializer=_bootstrap_init,
                                 initargs=(ds, cfg, bcfg)) as pool:
            for k, arcs in enumerate(pool.map(_bootstrap_one, indices)):
                arcs_per_iter[k] = arcs
                if progress is not None and not progress(k + 1, bcfg.iterations):
                    pool.shutdown(cancel_futures=True)
                    raise InterruptedError("bootstrap cancelled")
    else:
        shared = None if bcfg.resample else LocalScoreCache(ds, cfg.score)
        for k, i in enumerate(indices):
            arcs_per_iter[k] = _run_iteration(ds, cfg, bcfg, i, cache=shared)
            if progress is not None and not progress(k + 1, bcfg.iterations):
                raise InterruptedError("bootstrap cancelled")

    table = aggregate_strengths(variables, arcs_per_iter)
    dags = [Dag(tuple(variables), arcs) for arcs in arcs_per_iter]
    return table, dags


def aggregate_strengths(nodes, arc_sets) -> StrengthTable:
    """Strength = fraction of iterations containing the pair in either
    direction; direction(a->b) = share of those containing a->b."""
    arc_sets = list(arc_sets)
    pair_counts: dict[tuple[str, str], int] = {}
    arc_counts: dict[tuple[str, str], int] = {}
    for arcs in arc_sets:
        for a, b in arcs:
            key = (a, b) if a < b else (b, a)
            pair_counts[key] = pair_counts.get(key, 0) + 1
            arc_counts[(a, b)] = arc_counts.get((a, b), 0) + 1
    entries = {}
    for (a, b), cnt in pair_counts.items():
        strength = cnt / len(arc_sets)
        d_ab = arc_counts.get((a, b), 0) / cnt if cnt else 0.5
        entries[(a, b)] = (strength, d_ab)
    return StrengthTable(tuple(nodes), entries, len(arc_sets))


def averaged_network(st: StrengthTable, edge_threshold: float,
                     direction_threshold: float) -> Dag:
    """Consensus DAG: keep pairs above the edge threshold, orient by direction
    confidence (majority when both directions miss the threshold), then break
    any cycles by dropping the weakest-strength arcs."""
    order = {v: i for i, v in enumerate(st.nodes)}
    arcs: list[tuple[str, str, float]] = []
    for (a, b), (s, d_ab) in sorted(st.entries.items()):
        if s <= edge_threshold:
            continue
        if d_ab > direction_threshold:
            arcs.append((a, b, s))
        elif (1.0 - d_ab) > direction_threshold:
            arcs.append((b, a, s))
        elif d_ab > 0.5:
            arcs.append((a, b, s))
        elif d_ab < 0.5:
            arcs.append((b, a, s))
        else:
            first, second = (a, b) if order[a] < order[b] else (b, a)
            arcs.append((first, second, s))
    chosen = {(a, b): s for a, b, s in arcs}
    while True:
        cycle = _find_cycle_in(st.nodes, chosen)
        if not cycle:
            break
        weakest = min(cycle, key=lambda arc: (chosen[arc], arc))
        del chosen[weakest]
    return Dag(tuple(st.nodes), tuple(sorted(chosen)))


def _find_cycle_in(nodes, arcs: dict) -> list[tuple[str, str]]:
    from .graph import _find_cycle

    children: dict[str, set[str]] = {}
    for a, b in arcs:
        children.setdefault(a, set()).add(b)
    cyc = _find_cycle(nodes, children)
    if not cyc:
        return []
    return [(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))]


# -- validation --------------------------------------------------------------------

def validate(ds: Dataset, cfg: SearchConfig, mode: str = "kfold",
             k: int = 10, fraction: float = 0.2) -> ValidationReport:
    """k-fold or hold-out estimate of per-observation negative log-likelihood.

    Each fold learns a structure and fits smoothed parameters on the training
    split; the loss decomposes per variable and sums to the total.
    """
    variables = ds.learning_variables()
    n = ds.n_rows
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(n)
    if mode == "kfold":
        folds = [perm[i::k] for i in range(k)]
    elif mode == "holdout":
        cut = max(1, int(round(fraction * n)))
        folds = [perm[:cut]]
    else:
        raise ColumnError(f"unknown validation mode {mode!r}")
    per_var = {v: 0.0 for v in variables}
    heldout_scores = []
    total_rows = 0
    for fold in folds:
        test_idx = np.sort(fold)
        train_mask = np.ones(n, dtype=bool)
        train_mask[test_idx] = False
        train = ds.select_rows(np.where(train_mask)[0])
        test = ds.select_rows(test_idx)
        dag = learn_structure(train, cfg)
        bn = fit(train, dag, method="bayes", iss=1.0)
        for v in variables:
            cpt = bn.cpts[v]
            config = np.zeros(test.n_rows, dtype=np.int64)
            for p in cpt.parents:
                config = config * len(bn.levels(p)) + test.codes(p)
            probs = cpt.table[config, test.codes(v)]
            per_var[v] += float(-np.log(probs).sum())
        heldout_scores.append(network_score(test, dag, cfg.score))
        total_rows += test.n_rows
    per_var = {v: loss / total_rows for v, loss in per_var.items()}
    mean_loss = float(sum(per_var.values()))
    return ValidationReport(mean_loss, per_var, float(np.mean(heldout_scores)), len(folds))
