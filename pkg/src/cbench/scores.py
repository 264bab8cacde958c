"""Decomposable network scores for discrete data and conditional-independence tests.

All scores are "higher is better". The BIC convention is
loglik - (k/2)*ln(n), which keeps replication settings comparable with the
common structure-learning toolchain. Interventional rows are excluded per
node for the mbde score only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import chi2 as _chi2

from .dataset import Dataset
from .errors import ColumnError
from .graph import Dag

SCORE_KINDS = ("loglik", "aic", "bic", "bde", "mbde")


@dataclass(frozen=True)
class ScoreSpec:
    kind: str = "bic"
    iss: float = 1.0

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise ColumnError(f"unknown score kind {self.kind!r}")
        if self.iss <= 0:
            raise ColumnError("iss must be positive")

    def to_json(self) -> dict:
        return {"kind": self.kind, "iss": self.iss}

    @staticmethod
    def from_json(doc: dict) -> "ScoreSpec":
        return ScoreSpec(doc.get("kind", "bic"), float(doc.get("iss", 1.0)))


@dataclass(frozen=True)
class CiTestResult:
    statistic: float
    df: int
    p_value: float


class LocalScoreCache:
    """Memoized local scores keyed by (node, parent set).

    Reads and writes are plain dict operations (atomic under the GIL) and
    writes are idempotent, so the cache can be shared across search threads.
    """

    def __init__(self, ds: Dataset, spec: ScoreSpec):
        self.ds = ds
        self.spec = spec
        self._cache: dict[tuple[str, frozenset], float] = {}

    def local(self, node: str, parents) -> float:
        key = (node, frozenset(parents))
        hit = self._cache.get(key)
        if hit is None:
            hit = local_score(self.ds, node, key[1], self.spec)
            self._cache[key] = hit
        return hit

    def network(self, g: Dag) -> float:
        return sum(self.local(v, g.parents(v)) for v in g.nodes)

    def __len__(self):
        return len(self._cache)


_DENSE_CELL_LIMIT = 1 << 21  # direct bincount below this q*r, sort-based above


def _counts(ds: Dataset, node: str, parents: tuple[str, ...], exclude: np.ndarray | None):
    """Observed child-by-parent-config counts.

    Returns (counts[n_configs, r], q) where q is the full parent state-space
    size (needed by penalties) while counts only cover observed configs --
    unobserved configs contribute nothing to any score term.
    """
    child = ds.column(node)
    if child.kind != "factor":
        raise ColumnError(f"node {node!r} is not a factor column")
    r = len(child.levels)
    codes = child.values
    keep = None
    if child.has_missing:
        keep = codes >= 0
    if exclude is not None:
        keep = ~exclude if keep is None else keep & ~exclude
    q = 1
    if parents:
        config = None
        for p in parents:
            pc = ds.column(p)
            if pc.kind != "factor":
                raise ColumnError(f"parent {p!r} is not a factor column")
            if pc.has_missing:
                keep = pc.values >= 0 if keep is None else keep & (pc.values >= 0)
            vals = pc.values
            config = vals if config is None else config * len(pc.levels) + vals
            q *= len(pc.levels)
        if keep is not None:
            # recompute on the kept rows so masked negatives cannot leak in
            config = None
            for p in parents:
                vals = ds.column(p).values[keep]
                config = vals if config is None else config * len(ds.column(p).levels) + vals
        child_codes = codes[keep] if keep is not None else codes
    else:
        child_codes = codes[keep] if keep is not None else codes
        config = np.zeros(len(child_codes), dtype=np.int64)
    if child_codes.size == 0:
        return np.zeros((0, r)), q, r
    if q * r <= _DENSE_CELL_LIMIT:
        flat = np.bincount(config * r + child_codes, minlength=q * r)
        table = flat.reshape(q, r)
        observed = table.sum(axis=1) > 0
        return table[observed].astype(float), q, r
    uniq, inv = np.unique(config, return_inverse=True)
    flat = np.bincount(inv * r + child_codes, minlength=len(uniq) * r)
    return flat.reshape(len(uniq), r).astype(float), q, r


def local_score(ds: Dataset, node: str, parents, spec: ScoreSpec) -> float:
    """Score of one node given a parent set; see module docstring for conventions."""
    parents = tuple(sorted(parents))
    if node in parents:
        raise ColumnError(f"node {node!r} cannot be its own parent")
    exclude = None
    if spec.kind == "mbde":
        mask = ds.intervened_mask(node)
        exclude = mask if mask.any() else None
    counts, q, r = _counts(ds, node, parents, exclude)
    n_j = counts.sum(axis=1)
    n = float(n_j.sum())

    if spec.kind in ("loglik", "aic", "bic"):
        if n == 0:
            raise ColumnError("empty dataset")
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(counts > 0, counts * np.log(counts / n_j[:, None]), 0.0)
        ll = float(terms.sum())
        if spec.kind == "loglik":
            return ll
        penalty = q * (r - 1)
        if spec.kind == "aic":
            return ll - penalty
        return ll - (penalty / 2.0) * np.log(n)

    # bde / mbde: Dirichlet-multinomial marginal likelihood with uniform prior mass
    a_j = spec.iss / q
    a_jk = spec.iss / (r * q)
    score = float(np.sum(gammaln(a_j) - gammaln(a_j + n_j)))
    score += float(np.sum(gammaln(a_jk + counts) - gammaln(a_jk)))
    return score


def network_score(ds: Dataset, g: Dag, spec: ScoreSpec,
                  cache: LocalScoreCache | None = None) -> float:
    if cache is not None:
        return cache.network(g)
    return sum(local_score(ds, v, g.parents(v), spec) for v in g.nodes)


def ci_test(ds: Dataset, x: str, y: str, given=()) -> CiTestResult:
    """G-squared likelihood-ratio test of x independent of y given a factor set.

    Statistic and degrees of freedom accumulate over non-empty conditioning
    strata; df = 0 yields p = 1.
    """
    cx, cy = ds.column(x), ds.column(y)
    if cx.kind != "factor" or cy.kind != "factor":
        raise ColumnError("ci_test requires factor columns")
    rx, ry = len(cx.levels), len(cy.levels)
    keep = (cx.values >= 0) & (cy.values >= 0)
    given = tuple(sorted(given))
    if given:
        strat = np.zeros(ds.n_rows, dtype=np.int64)
        for zname in given:
            z = ds.column(zname)
            if z.kind != "factor":
                raise ColumnError("ci_test requires factor columns")
            keep &= z.values >= 0
            strat = strat * len(z.levels) + np.maximum(z.values, 0)
        strat = strat[keep]
    else:
        strat = np.zeros(int(keep.sum()), dtype=np.int64)
    xs, ys = cx.values[keep], cy.values[keep]
    stat, df = 0.0, 0
    if xs.size:
        uniq, inv = np.unique(strat, return_inverse=True)
        flat = np.bincount((inv * rx + xs) * ry + ys, minlength=len(uniq) * rx * ry)
        tables = flat.reshape(len(uniq), rx, ry).astype(float)
        for t in tables:
            n = t.sum()
            if n == 0:
                continue
            rows = t.sum(axis=1, keepdims=True)
            cols = t.sum(axis=0, keepdims=True)
            expected = rows @ cols / n
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(t > 0, t * np.log(t / expected), 0.0)
            stat += 2.0 * float(terms.sum())
            df += (rx - 1) * (ry - 1)
    stat = max(stat, 0.0)
    p = 1.0 if df == 0 else float(_chi2.sf(stat, df))
    return CiTestResult(stat, df, p)
