"""Directed acyclic graphs, arc constraints, CPDAG conversion and edge lists.

Graphs are immutable values: every edit returns a new ``Dag``. Acyclicity is
validated on construction and cycle errors carry the offending node sequence.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError, CycleError, ParseError

Arc = tuple[str, str]


def _find_cycle(nodes, children) -> list[str]:
    """Return one directed cycle as a node sequence (first == last dropped)."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {v: WHITE for v in nodes}
    stack: list[str] = []

    def dfs(v):
        color[v] = GREY
        stack.append(v)
        for w in sorted(children.get(v, ())):
            if color[w] == GREY:
                return stack[stack.index(w):]
            if color[w] == WHITE:
                found = dfs(w)
                if found:
                    return found
        stack.pop()
        color[v] = BLACK
        return None

    for v in nodes:
        if color[v] == WHITE:
            cyc = dfs(v)
            if cyc:
                return cyc
    return []


@dataclass(frozen=True)
class Dag:
    """A directed acyclic graph over named nodes.

    ``nodes`` keeps the declared order (used for deterministic tie-breaks);
    ``arcs`` is stored canonically sorted by (from, to).
    """

    nodes: tuple[str, ...]
    arcs: tuple[Arc, ...] = ()

    def __post_init__(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ConstraintError("duplicate node names")
        seen = set()
        for a, b in self.arcs:
            if a not in node_set or b not in node_set:
                raise ConstraintError(f"arc ({a},{b}) references unknown node")
            if a == b:
                raise ConstraintError(f"self-arc on {a}")
            if (a, b) in seen:
                raise ConstraintError(f"duplicate arc ({a},{b})")
            seen.add((a, b))
        object.__setattr__(self, "arcs", tuple(sorted(self.arcs)))
        children: dict[str, set[str]] = {}
        for a, b in self.arcs:
            children.setdefault(a, set()).add(b)
        cycle = _find_cycle(self.nodes, children)
        if cycle:
            raise CycleError(cycle)

    # -- structure accessors -------------------------------------------------

    def parents(self, node: str) -> tuple[str, ...]:
        return tuple(sorted(a for a, b in self.arcs if b == node))

    def children(self, node: str) -> tuple[str, ...]:
        return tuple(sorted(b for a, b in self.arcs if a == node))

    def parent_map(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {v: [] for v in self.nodes}
        for a, b in self.arcs:
            out[b].append(a)
        return out

    def has_arc(self, a: str, b: str) -> bool:
        return (a, b) in set(self.arcs)

    def arc_set(self) -> frozenset[Arc]:
        return frozenset(self.arcs)

    def topological_order(self) -> list[str]:
        indeg = {v: 0 for v in self.nodes}
        for _, b in self.arcs:
            indeg[b] += 1
        children = self.child_map()
        # Kahn's algorithm seeded in declared node order for determinism.
        order, ready = [], [v for v in self.nodes if indeg[v] == 0]
        while ready:
            v = ready.pop(0)
            order.append(v)
            for w in children[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        return order

    def child_map(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {v: [] for v in self.nodes}
        for a, b in self.arcs:
            out[a].append(b)
        return out

    def has_path(self, src: str, dst: str) -> bool:
        """True if a directed path src -> ... -> dst exists (src == dst counts)."""
        if src == dst:
            return True
        children = self.child_map()
        stack, seen = [src], {src}
        while stack:
            v = stack.pop()
            for w in children[v]:
                if w == dst:
                    return True
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def reachability(self) -> dict[str, set[str]]:
        """descendants[v] = set of nodes reachable from v (excluding v)."""
        children = self.child_map()
        desc: dict[str, set[str]] = {}
        for v in reversed(self.topological_order()):
            acc: set[str] = set()
            for w in children[v]:
                acc.add(w)
                acc |= desc[w]
            desc[v] = acc
        return desc

    # -- edits ---------------------------------------------------------------

    def add_arc(self, a: str, b: str) -> "Dag":
        if self.has_arc(a, b):
            raise ConstraintError(f"arc ({a},{b}) already present")
        return Dag(self.nodes, self.arcs + ((a, b),))

    def remove_arc(self, a: str, b: str) -> "Dag":
        if not self.has_arc(a, b):
            raise ConstraintError(f"arc ({a},{b}) not present")
        return Dag(self.nodes, tuple(x for x in self.arcs if x != (a, b)))

    def reverse_arc(self, a: str, b: str) -> "Dag":
        if not self.has_arc(a, b):
            raise ConstraintError(f"arc ({a},{b}) not present")
        kept = tuple(x for x in self.arcs if x != (a, b))
        return Dag(self.nodes, kept + ((b, a),))

    def to_json(self) -> dict:
        return {"nodes": list(self.nodes), "arcs": [list(a) for a in self.arcs]}

    @staticmethod
    def from_json(doc: dict) -> "Dag":
        return Dag(tuple(doc["nodes"]), tuple((a, b) for a, b in doc["arcs"]))


@dataclass(frozen=True)
class ArcConstraints:
    """Blacklisted (forbidden) and whitelisted (forced) arcs."""

    blacklist: frozenset[Arc] = frozenset()
    whitelist: frozenset[Arc] = frozenset()

    def __post_init__(self):
        overlap = self.blacklist & self.whitelist
        if overlap:
            raise ConstraintError(f"arcs both black- and whitelisted: {sorted(overlap)}")
        if self.whitelist:
            nodes = sorted({n for arc in self.whitelist for n in arc})
            Dag(tuple(nodes), tuple(self.whitelist))  # raises CycleError if cyclic

    @staticmethod
    def of(blacklist=(), whitelist=()) -> "ArcConstraints":
        return ArcConstraints(frozenset(tuple(a) for a in blacklist),
                              frozenset(tuple(a) for a in whitelist))

    def allows_arc(self, a: str, b: str) -> bool:
        return (a, b) not in self.blacklist

    def to_json(self) -> dict:
        return {"blacklist": sorted(list(a) for a in self.blacklist),
                "whitelist": sorted(list(a) for a in self.whitelist)}

    @staticmethod
    def from_json(doc: dict) -> "ArcConstraints":
        return ArcConstraints.of(doc.get("blacklist", ()), doc.get("whitelist", ()))


@dataclass(frozen=True)
class Cpdag:
    """Equivalence-class graph: directed arcs plus undirected edges."""

    nodes: tuple[str, ...]
    directed: frozenset[Arc] = frozenset()
    undirected: frozenset[frozenset] = field(default_factory=frozenset)

    def skeleton(self) -> set[frozenset]:
        return {frozenset(a) for a in self.directed} | set(self.undirected)


# -- edge-list interchange ----------------------------------------------------

def import_edgelist(data: bytes | str, nodes: list[str] | None = None,
                    require_acyclic: bool = True):
    """Read a from,to CSV edge list.

    Returns a ``Dag`` when ``require_acyclic`` (the default); otherwise the raw
    arc list (used for blacklist/whitelist files, which may contain cycles).
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(f.strip() for f in row)]
    if not rows:
        raise ParseError("empty edge list")
    header = [h.strip().lower() for h in rows[0]]
    if header[:2] != ["from", "to"]:
        raise ParseError("edge list must have a 'from,to' header")
    arcs: list[Arc] = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise ParseError(f"edge list row {i}: expected 2 fields")
        arcs.append((row[0].strip(), row[1].strip()))
    if not require_acyclic:
        return arcs
    if nodes is None:
        nodes = sorted({n for arc in arcs for n in arc})
    else:
        known = set(nodes)
        for a, b in arcs:
            if a not in known or b not in known:
                raise ParseError(f"edge list references unknown node in arc ({a},{b})")
    return Dag(tuple(nodes), tuple(arcs))


def export_edgelist(g: Dag) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from", "to"])
    for a, b in g.arcs:
        w.writerow([a, b])
    return buf.getvalue().encode("utf-8")


# -- CPDAG machinery ----------------------------------------------------------

def _v_structures(g: Dag) -> set[Arc]:
    """Arcs that participate in a v-structure a -> c <- b with a, b non-adjacent."""
    adj = {frozenset(a) for a in g.arcs}
    keep: set[Arc] = set()
    for c in g.nodes:
        ps = g.parents(c)
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                a, b = ps[i], ps[j]
                if frozenset((a, b)) not in adj:
                    keep.add((a, c))
                    keep.add((b, c))
    return keep


def _apply_meek(nodes, directed: set[Arc], undirected: set[frozenset]) -> None:
    """Orient undirected edges in place using Meek's rules R1-R4 to closure."""
    def adjacent(x, y):
        return (x, y) in directed or (y, x) in directed or frozenset((x, y)) in undirected

    changed = True
    while changed:
        changed = False
        for e in sorted(undirected, key=sorted):
            x, y = sorted(e)
            for a, b in ((x, y), (y, x)):
                # R1: c -> a, c not adjacent to b  =>  a -> b
                r1 = any((c, a) in directed and not adjacent(c, b)
                         for c in nodes if c not in (a, b))
                # R2: a -> c -> b  =>  a -> b
                r2 = any((a, c) in directed and (c, b) in directed
                         for c in nodes if c not in (a, b))
                # R3: a - c -> b and a - d -> b, c,d non-adjacent  =>  a -> b
                r3 = False
                cands = [c for c in nodes if c not in (a, b)
                         and frozenset((a, c)) in undirected and (c, b) in directed]
                for i in range(len(cands)):
                    for j in range(i + 1, len(cands)):
                        if not adjacent(cands[i], cands[j]):
                            r3 = True
                # R4: a - d, d -> c, c -> b, d,b non-adjacent, a adj c  =>  a -> b
                r4 = False
                for c in nodes:
                    if c in (a, b) or not adjacent(a, c):
                        continue
                    for d in nodes:
                        if d in (a, b, c):
                            continue
                        if (frozenset((a, d)) in undirected and (d, c) in directed
                                and (c, b) in directed and not adjacent(d, b)):
                            r4 = True
                if r1 or r2 or r3 or r4:
                    undirected.discard(e)
                    directed.add((a, b))
                    changed = True
                    break
            if changed:
                break


def to_cpdag(g: Dag) -> Cpdag:
    """Completed PDAG of g's Markov equivalence class.

    V-structure arcs stay directed, everything else starts undirected, then
    Meek's orientation rules run to closure.
    """
    directed = set(_v_structures(g))
    undirected = {frozenset(a) for a in g.arcs if a not in directed}
    _apply_meek(g.nodes, directed, undirected)
    return Cpdag(g.nodes, frozenset(directed), frozenset(undirected))


def consistent_extension(c: Cpdag, constraints: ArcConstraints | None = None) -> Dag:
    """Orient a CPDAG's undirected edges into a DAG without new v-structures.

    Dor-Tarsi style: repeatedly pick a sink candidate and orient its undirected
    edges inward. Falls back to node-order orientation (cycle-checked) when no
    perfect extension exists. Blacklisted directions are avoided where possible
    and dropped when both directions are forbidden.
    """
    constraints = constraints or ArcConstraints()
    directed = set(c.directed)
    undirected = {e for e in c.undirected}
    dropped: set[frozenset] = set()
    for e in list(undirected):
        x, y = sorted(e)
        if (x, y) in constraints.blacklist and (y, x) in constraints.blacklist:
            undirected.discard(e)
            dropped.add(e)

    def neighbors(v, und):
        return {next(iter(e - {v})) for e in und if v in e}

    nodes_left = list(c.nodes)
    und = set(undirected)
    dir_ = set(directed)
    while nodes_left:
        progressed = False
        for v in list(nodes_left):
            # v is a sink candidate: no outgoing directed arcs among remaining
            if any(a == v and b in nodes_left for a, b in dir_):
                continue
            nbrs = neighbors(v, und)
            # all undirected neighbors must be adjacent to every other
            # vertex adjacent to v (guarantees no new v-structure)
            adj_v = nbrs | {a for a, b in dir_ if b == v and a in nodes_left}
            ok = all(
                all(w == u or frozenset((w, u)) in und or (w, u) in dir_ or (u, w) in dir_
                    for u in adj_v)
                for w in nbrs)
            if not ok:
                continue
            for w in sorted(nbrs):
                e = frozenset((w, v))
                und.discard(e)
                if (w, v) in constraints.blacklist:
                    dir_.add((v, w))
                else:
                    dir_.add((w, v))
            nodes_left.remove(v)
            progressed = True
        if not progressed:
            # no perfect extension: orient remaining edges by node order
            order = {n: i for i, n in enumerate(c.nodes)}
            for e in sorted(und, key=sorted):
                x, y = sorted(e, key=lambda n: order[n])
                a, b = (x, y) if (x, y) not in constraints.blacklist else (y, x)
                trial = dir_ | {(a, b)}
                if not _arcs_cyclic(c.nodes, trial):
                    dir_.add((a, b))
                elif not _arcs_cyclic(c.nodes, dir_ | {(b, a)}) and (b, a) not in constraints.blacklist:
                    dir_.add((b, a))
                # else: drop the edge to preserve acyclicity
            und = set()
            break
    arcs = {a for a in dir_ if (a[1], a[0]) not in dir_ or a < (a[1], a[0])}
    # keep whitelisted arcs even if the skeleton missed them
    for a, b in sorted(constraints.whitelist):
        if (a, b) not in arcs and (b, a) in arcs:
            arcs.discard((b, a))
        if (a, b) not in arcs:
            trial = arcs | {(a, b)}
            if not _arcs_cyclic(c.nodes, trial):
                arcs.add((a, b))
    return Dag(c.nodes, tuple(sorted(arcs)))


def _arcs_cyclic(nodes, arcs) -> bool:
    children: dict[str, set[str]] = {}
    for a, b in arcs:
        children.setdefault(a, set()).add(b)
    return bool(_find_cycle(nodes, children))


def random_dag(nodes, max_parents: int | None = None, seed: int = 0) -> Dag:
    """Random DAG: uniform topological order, independent arc inclusion.

    Arc probability is ``m / (n - 1 + m)`` where m is the parent budget
    (defaulting to 2 when unlimited), giving an expected in-degree close to m
    on large graphs while keeping every DAG consistent with the cap reachable.
    Parents are capped at ``max_parents`` when finite. Deterministic per seed.
    """
    nodes = list(nodes)
    n = len(nodes)
    rng = np.random.default_rng(seed)
    order = [nodes[i] for i in rng.permutation(n)]
    if max_parents is not None and max_parents <= 0:
        return Dag(tuple(nodes))
    m = 2 if max_parents is None else max_parents
    p = m / (n - 1 + m) if n > 1 else 0.0
    arcs: list[Arc] = []
    n_parents = {v: 0 for v in nodes}
    for j in range(1, n):
        for i in range(j):
            if max_parents is not None and n_parents[order[j]] >= max_parents:
                break
            if rng.random() < p:
                arcs.append((order[i], order[j]))
                n_parents[order[j]] += 1
    return Dag(tuple(nodes), tuple(arcs))
