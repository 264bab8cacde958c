import itertools

import hypothesis
import numpy as np
import pytest

from cbench.dataset import Column, Dataset
from cbench.graph import Dag

hypothesis.settings.register_profile("suite", max_examples=30, deadline=None)
hypothesis.settings.load_profile("suite")


def make_factor_ds(name, **columns):
    """columns: name -> list of level labels (None = missing)."""
    cols = []
    for cname, values in columns.items():
        levels = tuple(sorted({v for v in values if v is not None}))
        lut = {lv: i for i, lv in enumerate(levels)}
        codes = np.array([-1 if v is None else lut[v] for v in values], dtype=np.int64)
        cols.append(Column(cname, "factor", codes, levels))
    return Dataset(name, tuple(cols))


def all_three_node_dags(nodes=("A", "B", "C")):
    """All 25 DAGs over three labeled nodes."""
    pairs = list(itertools.permutations(nodes, 2))
    out = []
    for mask in range(2 ** len(pairs)):
        arcs = tuple(p for i, p in enumerate(pairs) if mask >> i & 1)
        try:
            out.append(Dag(tuple(nodes), arcs))
        except Exception:
            continue
    return out


def brute_force_query(bn, event, evidence=None):
    """Full-joint enumeration oracle, independent of the elimination engine."""
    evidence = evidence or {}
    nodes = bn.dag.nodes
    levels = {v: bn.levels(v) for v in nodes}
    dist = {lv: 0.0 for lv in levels[event]}
    for combo in itertools.product(*(range(len(levels[v])) for v in nodes)):
        assign = dict(zip(nodes, combo))
        if any(assign[n] != levels[n].index(lv) for n, lv in evidence.items()):
            continue
        p = 1.0
        for v in nodes:
            cpt = bn.cpts[v]
            j = 0
            for par, dims in zip(cpt.parents, cpt.parent_levels):
                j = j * len(dims) + assign[par]
            p *= cpt.table[j, assign[v]]
        dist[levels[event][assign[event]]] += p
    total = sum(dist.values())
    if total == 0:
        raise ZeroDivisionError("impossible evidence")
    return {k: v / total for k, v in dist.items()}


def random_binary_bn(n_nodes, seed):
    """Random small network with binary nodes and dirichlet-ish CPTs."""
    from cbench.graph import random_dag
    from cbench.inference import Cpt, FittedBn

    rng = np.random.default_rng(seed)
    names = tuple(f"N{i}" for i in range(n_nodes))
    dag = random_dag(names, max_parents=3, seed=seed)
    cpts = {}
    for v in names:
        parents = dag.parents(v)
        q = 2 ** len(parents)
        raw = rng.uniform(0.05, 0.95, size=(q, 1))
        table = np.hstack([raw, 1.0 - raw])
        cpts[v] = Cpt(v, parents, ("f", "t"), tuple(("f", "t") for _ in parents), table)
    return FittedBn(dag, cpts)


@pytest.fixture
def chain_bn():
    """A -> B with P(A=t)=0.5, P(B=t|A=t)=0.9, P(B=t|A=f)=0.2."""
    from cbench.inference import Cpt, FittedBn

    dag = Dag(("A", "B"), (("A", "B"),))
    cpts = {
        "A": Cpt("A", (), ("f", "t"), (), np.array([[0.5, 0.5]])),
        "B": Cpt("B", ("A",), ("f", "t"), (("f", "t"),),
                 np.array([[0.8, 0.2], [0.1, 0.9]])),
    }
    return FittedBn(dag, cpts)


def three_node_corpus():
    """Synthetic 3-node datasets exercising distinct structures; deterministic."""
    rng = np.random.default_rng(42)
    n = 800
    corpus = {}

    a = rng.integers(0, 2, n)
    b = (a ^ (rng.random(n) < 0.15)).astype(np.int64)
    c = (b ^ (rng.random(n) < 0.2)).astype(np.int64)
    corpus["chain"] = _ds3(a, b, c)

    a = rng.integers(0, 2, n)
    b = rng.integers(0, 2, n)
    c = ((a & b) ^ (rng.random(n) < 0.1)).astype(np.int64)
    corpus["collider"] = _ds3(a, b, c)

    a = rng.integers(0, 2, n)
    b = (a ^ (rng.random(n) < 0.2)).astype(np.int64)
    c = (a ^ (rng.random(n) < 0.25)).astype(np.int64)
    corpus["fork"] = _ds3(a, b, c)

    corpus["independent"] = _ds3(rng.integers(0, 2, n), rng.integers(0, 2, n),
                                 rng.integers(0, 2, n))

    a = rng.integers(0, 2, n)
    b = (a ^ (rng.random(n) < 0.3)).astype(np.int64)
    c = ((a | b) ^ (rng.random(n) < 0.15)).astype(np.int64)
    corpus["dense"] = _ds3(a, b, c)

    a = rng.integers(0, 2, n)
    b = rng.integers(0, 2, n)
    c = ((a ^ b) ^ (rng.random(n) < 0.05)).astype(np.int64)
    corpus["xor_trap"] = _ds3(a, b, c)

    return corpus


def _ds3(a, b, c):
    return Dataset("synth", (
        Column("A", "factor", np.asarray(a, dtype=np.int64), ("0", "1")),
        Column("B", "factor", np.asarray(b, dtype=np.int64), ("0", "1")),
        Column("C", "factor", np.asarray(c, dtype=np.int64), ("0", "1"))))


@pytest.fixture(scope="session")
def corpus3():
    return three_node_corpus()
