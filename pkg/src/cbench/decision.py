"""Influence diagrams over a fitted network: payoff nodes, decision clamping
and Monte-Carlo (or exact) policy evaluation.

Decisions act as interventions: arcs into each decision variable are severed
and the variable is clamped before evaluating the utility distribution.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ColumnError
from .graph import Dag
from .inference import EXACT_NODE_LIMIT, FittedBn, Query, exact_query, _sample_rows, _level_index


@dataclass(frozen=True)
class InfluenceDiagram:
    bn: FittedBn
    utility_var: str
    payoffs: dict[str, float]  # utility level -> payoff in [-1, 1]
    decision_vars: tuple[str, ...]

    def __post_init__(self):
        if self.utility_var not in self.bn.cpts:
            raise ColumnError(f"unknown utility variable {self.utility_var!r}")
        if not self.decision_vars:
            raise ColumnError("decision set is empty: nothing to optimize")
        if self.utility_var in self.decision_vars:
            raise ColumnError("utility variable cannot be a decision variable")
        for d in self.decision_vars:
            if d not in self.bn.cpts:
                raise ColumnError(f"unknown decision variable {d!r}")
        levels = self.bn.levels(self.utility_var)
        for lv in levels:
            if lv not in self.payoffs:
                raise ColumnError(f"payoff missing for level {lv!r}")
        for lv, u in self.payoffs.items():
            if lv not in levels:
                raise ColumnError(f"payoff for unknown level {lv!r}")
            if not (-1.0 <= u <= 1.0):
                raise ColumnError(f"payoff for {lv!r} outside [-1, 1]")

    def to_json(self) -> dict:
        return {"utility_var": self.utility_var, "payoffs": dict(self.payoffs),
                "decision_vars": list(self.decision_vars)}


@dataclass(frozen=True)
class PolicyTable:
    decision_vars: tuple[str, ...]
    rows: tuple[tuple[tuple[str, ...], float], ...]  # (levels per decision var, payoff)

    def to_json(self) -> dict:
        return {"decision_vars": list(self.decision_vars),
                "rows": [{"assignment": dict(zip(self.decision_vars, levels)),
                          "payoff": payoff} for levels, payoff in self.rows]}


def build_diagram(bn: FittedBn, utility_var: str, payoffs: dict[str, float],
                  decision_vars) -> InfluenceDiagram:
    return InfluenceDiagram(bn, utility_var, dict(payoffs), tuple(decision_vars))


def _mutilate(bn: FittedBn, decision_vars) -> Dag:
    """Sever all arcs into the decision variables."""
    keep = tuple(a for a in bn.dag.arcs if a[1] not in decision_vars)
    return Dag(bn.dag.nodes, keep)


def _mutilated_bn(id_: InfluenceDiagram) -> FittedBn:
    from .inference import Cpt

    cut = _mutilate(id_.bn, id_.decision_vars)
    cpts = dict(id_.bn.cpts)
    for d in id_.decision_vars:
        levels = id_.bn.levels(d)
        # placeholder root table; clamping overrides it during evaluation
        cpts[d] = Cpt(d, (), levels, (), np.full((1, len(levels)), 1.0 / len(levels)))
    return FittedBn(cut, cpts, id_.bn.fit_method, id_.bn.iss)


def _relevant_nodes(dag: Dag, target: str) -> set[str]:
    """target plus its ancestors."""
    parents = dag.parent_map()
    out = {target}
    frontier = [target]
    while frontier:
        v = frontier.pop()
        for p in parents[v]:
            if p not in out:
                out.add(p)
                frontier.append(p)
    return out


def expected_payoff(id_: InfluenceDiagram, assignment: dict[str, str],
                    mc_samples: int = 100_000, seed: int = 0,
                    method: str = "auto") -> float:
    """Expected payoff of one joint decision assignment.

    Clamps decisions in the mutilated network, then either evaluates the
    utility distribution exactly (small ancestor closures) or estimates it by
    ancestral sampling of mc_samples draws.
    """
    for d in id_.decision_vars:
        if d not in assignment:
            raise ColumnError(f"assignment missing decision variable {d!r}")
    mbn = _mutilated_bn(id_)
    if method == "auto":
        relevant = _relevant_nodes(mbn.dag, id_.utility_var)
        method = "exact" if len(relevant) <= EXACT_NODE_LIMIT else "mc"
    levels = id_.bn.levels(id_.utility_var)
    payoff_vec = np.array([id_.payoffs[lv] for lv in levels])
    if method == "exact":
        res = exact_query(mbn, Query(id_.utility_var, dict(assignment)))
        dist = np.array([res.distribution[lv] for lv in levels])
        return float(dist @ payoff_vec)
    if method != "mc":
        raise ColumnError(f"unknown evaluation method {method!r}")
    rng_seed = seed
    clamp = {d: _level_index(mbn, d, lv) for d, lv in assignment.items()}
    samples, _ = _sample_rows(mbn, mc_samples, np.random.default_rng(rng_seed), clamp=clamp)
    drawn = samples[id_.utility_var]
    return float(payoff_vec[drawn].mean())


def learn_policy(id_: InfluenceDiagram, mc_samples: int = 100_000, seed: int = 0,
                 method: str = "auto") -> PolicyTable:
    """Evaluate every joint decision assignment and sort by expected payoff.

    Rows sort descending; ties break lexicographically by decision levels.
    Per-assignment sampling seeds derive from (seed, assignment index).
    """
    spaces = [id_.bn.levels(d) for d in id_.decision_vars]
    n_assign = 1
    for s in spaces:
        n_assign *= len(s)
    if n_assign > 1_000_000:
        raise ColumnError("joint decision space exceeds 1e6 assignments; "
                          "reduce the number of decision variables")
    rows = []
    for idx, combo in enumerate(itertools.product(*spaces)):
        assignment = dict(zip(id_.decision_vars, combo))
        payoff = expected_payoff(id_, assignment, mc_samples=mc_samples,
                                 seed=_combine_seed(seed, idx), method=method)
        rows.append((tuple(combo), payoff))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return PolicyTable(tuple(id_.decision_vars), tuple(rows))


def _combine_seed(seed: int, idx: int) -> list[int]:
    return [seed, idx]


def export_policy_csv(pt: PolicyTable) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(pt.decision_vars) + ["payoff"])
    for levels, payoff in pt.rows:
        w.writerow(list(levels) + [repr(float(payoff))])
    return buf.getvalue().encode("utf-8")
