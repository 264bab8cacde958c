"""Pairwise association networks over factor variables and link communities.

Edges are undirected, canonically ordered a < b, with weights in [0, 1].
Community detection clusters *edges* (Ahn-Bagrow-Lehmann link communities)
and cuts the dendrogram at the height maximizing partition density.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import csv
import io
import itertools

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .dataset import Dataset
from .errors import ColumnError

MEASURES = ("cramers_v", "tschuprow_t", "gk_lambda")
LINKAGES = ("single", "complete", "average", "ward")


@dataclass(frozen=True)
class AssocGraph:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]  # (a, b, weight), a < b
    measure: str = "cramers_v"

    def __post_init__(self):
        for a, b, w in self.edges:
            if a >= b:
                raise ColumnError(f"edge ({a},{b}) not in canonical order")
            if not (0.0 <= w <= 1.0):
                raise ColumnError(f"edge ({a},{b}) weight {w} outside [0,1]")

    def edge_pairs(self) -> list[tuple[str, str]]:
        return [(a, b) for a, b, _ in self.edges]


@dataclass(frozen=True)
class CommunityAssignment:
    communities: dict[tuple[str, str], int]  # edge -> community id
    partition_density: float = 0.0


def contingency(ds: Dataset, a: str, b: str) -> np.ndarray:
    ca, cb = ds.column(a), ds.column(b)
    if ca.kind != "factor" or cb.kind != "factor":
        raise ColumnError("contingency requires factor columns")
    ra, rb = len(ca.levels), len(cb.levels)
    keep = (ca.values >= 0) & (cb.values >= 0)
    flat = np.bincount(ca.values[keep] * rb + cb.values[keep], minlength=ra * rb)
    return flat.reshape(ra, rb).astype(float)


def _chi2_stat(table: np.ndarray) -> float:
    t = np.asarray(table, dtype=float)
    n = t.sum()
    rows = t.sum(axis=1, keepdims=True)
    cols = t.sum(axis=0, keepdims=True)
    expected = rows @ cols / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (t - expected) ** 2 / expected, 0.0)
    return float(terms.sum())


def _effective_dims(table: np.ndarray) -> tuple[int, int]:
    t = np.asarray(table, dtype=float)
    return int((t.sum(axis=1) > 0).sum()), int((t.sum(axis=0) > 0).sum())


def cramers_v(table) -> float:
    t = np.asarray(table, dtype=float)
    n = t.sum()
    r, c = _effective_dims(t)
    if n == 0 or min(r, c) <= 1:
        return 0.0
    v = np.sqrt(_chi2_stat(t) / (n * (min(r, c) - 1)))
    return float(min(v, 1.0))


def tschuprow_t(table) -> float:
    t = np.asarray(table, dtype=float)
    n = t.sum()
    r, c = _effective_dims(t)
    if n == 0 or min(r, c) <= 1:
        return 0.0
    v = np.sqrt(_chi2_stat(t) / (n * np.sqrt((r - 1) * (c - 1))))
    return float(min(v, 1.0))


def gk_lambda(table) -> float:
    """Symmetric Goodman-Kruskal lambda (proportional reduction in
    prediction error, averaged over both directions)."""
    t = np.asarray(table, dtype=float)
    n = t.sum()
    if n == 0:
        return 0.0
    row_max = t.max(axis=1).sum()
    col_max = t.max(axis=0).sum()
    max_col_tot = t.sum(axis=0).max()
    max_row_tot = t.sum(axis=1).max()
    denom = 2 * n - max_col_tot - max_row_tot
    if denom <= 0:
        return 0.0
    return float((row_max + col_max - max_col_tot - max_row_tot) / denom)


_MEASURE_FN = {"cramers_v": cramers_v, "tschuprow_t": tschuprow_t, "gk_lambda": gk_lambda}


def build_assoc(ds: Dataset, measure: str = "cramers_v", threshold: float = 0.0,
                workers: int = 1) -> AssocGraph:
    """Association graph keeping pairs with measure strictly above threshold.

    Pairs are independent, so evaluation can fan out over a thread pool; the
    merged edge list is always in canonical (a, b) order.
    """
    if measure not in _MEASURE_FN:
        raise ColumnError(f"unknown association measure {measure!r}")
    fn = _MEASURE_FN[measure]
    names = [c.name for c in ds.columns
             if c.kind == "factor" and c.name not in ds.indicator_columns]
    pairs = list(itertools.combinations(sorted(names), 2))

    def weigh(pair):
        a, b = pair
        return a, b, fn(contingency(ds, a, b))

    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(weigh, pairs))
    else:
        results = [weigh(p) for p in pairs]
    edges = tuple((a, b, w) for a, b, w in results if w > threshold)
    return AssocGraph(tuple(sorted(names)), edges, measure)


def export_edgelist(g: AssocGraph) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from", "to", "weight"])
    for a, b, weight in sorted(g.edges):
        w.writerow([a, b, repr(float(weight))])
    return buf.getvalue().encode("utf-8")


# -- link communities -----------------------------------------------------------


def _edge_similarity(edges, neighbors) -> np.ndarray:
    """Jaccard similarity of inclusive neighborhoods of the non-shared
    endpoints, for edge pairs sharing a node; 0 otherwise."""
    m = len(edges)
    sim = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            shared = set(edges[i]) & set(edges[j])
            if not shared:
                continue
            k = shared.pop()
            a = next(x for x in edges[i] if x != k)
            b = next(x for x in edges[j] if x != k)
            na = neighbors[a] | {a}
            nb = neighbors[b] | {b}
            sim[i, j] = sim[j, i] = len(na & nb) / len(na | nb)
    return sim


def partition_density(edges, labels) -> float:
    """D = (2/M) * sum_c m_c (m_c - n_c + 1) / ((n_c - 2)(n_c - 1));
    communities with fewer than 3 edges' worth of nodes contribute 0."""
    m_total = len(edges)
    if m_total == 0:
        return 0.0
    total = 0.0
    for cid in set(labels):
        members = [e for e, l in zip(edges, labels) if l == cid]
        mc = len(members)
        nodes = {v for e in members for v in e}
        nc = len(nodes)
        if nc <= 2:
            continue
        total += mc * (mc - nc + 1) / ((nc - 2) * (nc - 1))
    return 2.0 * total / m_total


def link_communities(g: AssocGraph, link: str = "ward") -> CommunityAssignment:
    """Agglomerative clustering of edges by neighborhood similarity, cut at
    the height maximizing partition density (ties go to the coarsest cut)."""
    if link not in LINKAGES:
        raise ColumnError(f"unknown linkage {link!r}")
    edges = g.edge_pairs()
    m = len(edges)
    if m == 0:
        return CommunityAssignment({}, 0.0)
    if m == 1:
        return CommunityAssignment({edges[0]: 0}, 0.0)
    neighbors: dict[str, set[str]] = {v: set() for v in g.nodes}
    for a, b in edges:
        neighbors[a].add(b)
        neighbors[b].add(a)
    dist = 1.0 - _edge_similarity(edges, neighbors)
    z = linkage(squareform(dist, checks=False), method=link)
    heights = sorted({float(h) for h in z[:, 2]})
    # candidate cuts: just below each merge height, plus above the last merge
    cuts = [heights[0] - 1.0] if heights else []
    cuts += [h for h in heights]
    best_labels, best_d, best_k = None, -np.inf, np.inf
    for cut in cuts:
        labels = fcluster(z, t=cut, criterion="distance")
        d = partition_density(edges, labels)
        k = len(set(labels))
        if d > best_d + 1e-12 or (abs(d - best_d) <= 1e-12 and k < best_k):
            best_labels, best_d, best_k = labels, d, k
    # renumber communities deterministically by first edge occurrence
    remap: dict[int, int] = {}
    out: dict[tuple[str, str], int] = {}
    for e, l in zip(edges, best_labels):
        if l not in remap:
            remap[l] = len(remap)
        out[e] = remap[l]
    return CommunityAssignment(out, float(best_d))
