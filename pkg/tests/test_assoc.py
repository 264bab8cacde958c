import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cbench.assoc import (AssocGraph, build_assoc, contingency, cramers_v,
                          export_edgelist, gk_lambda, link_communities,
                          partition_density, tschuprow_t)
from cbench.errors import ColumnError
from cbench.graph import import_edgelist

from conftest import make_factor_ds


class TestContingency:
    def test_matched_binary_pair(self):
        ds = make_factor_ds("t", x=["a"] * 10 + ["b"] * 10, y=["p"] * 10 + ["q"] * 10)
        assert contingency(ds, "x", "y").tolist() == [[10, 0], [0, 10]]

    def test_independent(self):
        x = ["a", "a", "b", "b"] * 5
        y = ["p", "q", "p", "q"] * 5
        ds = make_factor_ds("t", x=x, y=y)
        assert contingency(ds, "x", "y").tolist() == [[5, 5], [5, 5]]

    def test_3x2_brute_tally(self):
        x = ["a", "b", "c", "a", "c", "c"]
        y = ["p", "q", "p", "p", "q", "p"]
        ds = make_factor_ds("t", x=x, y=y)
        table = contingency(ds, "x", "y")
        expect = np.zeros((3, 2))
        for xv, yv in zip(x, y):
            expect["abc".index(xv), "pq".index(yv)] += 1
        assert (table == expect).all()

    def test_sums_to_n_rows(self):
        ds = make_factor_ds("t", x=["a", "b"] * 8, y=["p", "p", "q", "q"] * 4)
        assert contingency(ds, "x", "y").sum() == 16

    def test_non_factor_rejected(self):
        from cbench.dataset import Column, Dataset
        ds = Dataset("t", (Column("x", "numeric", np.arange(4.0)),
                           make_factor_ds("", y=["a"] * 4).column("y")))
        with pytest.raises(ColumnError):
            contingency(ds, "x", "y")


class TestMeasures:
    def test_cramers_v_values(self):
        assert cramers_v([[10, 0], [0, 10]]) == pytest.approx(1.0)
        assert cramers_v([[5, 5], [5, 5]]) == pytest.approx(0.0)
        # chi2 = 20*(3^2/5 + ... ) = 7.2 for the 8/2 table, V = sqrt(7.2/20)
        assert cramers_v([[8, 2], [2, 8]]) == pytest.approx(np.sqrt(7.2 / 20))

    def test_tschuprow_values(self):
        assert tschuprow_t([[10, 0], [0, 10]]) == pytest.approx(1.0)
        assert tschuprow_t([[5, 5], [5, 5]]) == pytest.approx(0.0)

    def test_single_level_table_is_zero(self):
        assert cramers_v([[7, 3]]) == 0.0
        assert tschuprow_t([[7], [3]]) == 0.0

    def test_gk_lambda_values(self):
        assert gk_lambda([[10, 0], [0, 10]]) == pytest.approx(1.0)
        assert gk_lambda([[5, 5], [5, 5]]) == pytest.approx(0.0)
        # direct evaluation of the symmetric formula for [[6,4],[1,9]]:
        # row maxima 6+9=15, col maxima 7+13=... cols sums (7,13) maxima (6,9)
        t = np.array([[6, 4], [1, 9]])
        n = 20
        expect = (t.max(axis=1).sum() + t.max(axis=0).sum()
                  - t.sum(axis=0).max() - t.sum(axis=1).max()) / (
                      2 * n - t.sum(axis=0).max() - t.sum(axis=1).max())
        assert gk_lambda(t) == pytest.approx(expect)
        assert gk_lambda([[20, 0], [0, 0]]) == 0.0  # all mass in one cell


@st.composite
def tables(draw):
    r = draw(st.integers(2, 4))
    c = draw(st.integers(2, 4))
    cells = draw(st.lists(st.integers(0, 30), min_size=r * c, max_size=r * c))
    t = np.array(cells, dtype=float).reshape(r, c)
    if t.sum() == 0:
        t[0, 0] = 1
    return t


@pytest.mark.parametrize("fn", [cramers_v, tschuprow_t, gk_lambda])
@given(table=tables())
def test_measures_range_and_permutation_invariance(fn, table):
    v = fn(table)
    assert 0.0 <= v <= 1.0
    perm_rows = table[::-1]
    perm_cols = table[:, ::-1]
    assert fn(perm_rows) == pytest.approx(v, abs=1e-12)
    assert fn(perm_cols) == pytest.approx(v, abs=1e-12)


@pytest.mark.parametrize("fn", [cramers_v, tschuprow_t, gk_lambda])
def test_measures_on_independent_and_diagonal(fn):
    indep = np.outer([4, 6, 10], [3, 7])
    assert fn(indep) == pytest.approx(0.0, abs=1e-12)
    diag = np.diag([5, 9, 2])
    assert fn(diag) == pytest.approx(1.0)


@given(table=tables())
def test_v_equals_t_on_2x2(table):
    t = table[:2, :2]
    if t.sum() == 0:
        return
    assert cramers_v(t) == pytest.approx(tschuprow_t(t), abs=1e-12)


class TestBuildAssoc:
    def _ds(self):
        rng = np.random.default_rng(8)
        n = 40
        x = rng.integers(0, 2, n)
        y = np.where(rng.random(n) < 0.9, x, 1 - x)  # strongly tied to x
        z = rng.integers(0, 2, n)
        return make_factor_ds("t",
                              x=[str(v) for v in x],
                              y=[str(v) for v in y],
                              z=[str(v) for v in z])

    def test_threshold_one_empty_unless_perfect(self):
        g = build_assoc(self._ds(), threshold=1.0)
        assert g.edges == ()
        perfect = make_factor_ds("t", x=["a"] * 5 + ["b"] * 5, y=["p"] * 5 + ["q"] * 5)
        g2 = build_assoc(perfect, threshold=0.999)
        assert [(a, b) for a, b, _ in g2.edges] == [("x", "y")]

    def test_threshold_zero_complete_minus_zero_pairs(self):
        ds = self._ds()
        g = build_assoc(ds, threshold=0.0)
        weights = {(a, b): w for a, b, w in g.edges}
        for a, b in itertools.combinations(sorted(["x", "y", "z"]), 2):
            v = cramers_v(contingency(ds, a, b))
            assert ((a, b) in weights) == (v > 0)

    def test_single_strong_edge_at_half_threshold(self):
        ds = make_factor_ds(
            "t",
            x=["a"] * 8 + ["b"] * 2 + ["a"] * 2 + ["b"] * 8,
            y=["p"] * 10 + ["q"] * 10,
            z=["u", "v"] * 10)
        # x-y has V = sqrt(7.2/20) = 0.6; z independent of both
        g = build_assoc(ds, threshold=0.5)
        assert [(a, b) for a, b, _ in g.edges] == [("x", "y")]

    def test_monotone_in_threshold(self):
        ds = self._ds()
        prev = None
        for thr in np.linspace(0, 1, 6):
            edges = {(a, b) for a, b, _ in build_assoc(ds, threshold=float(thr)).edges}
            if prev is not None:
                assert edges <= prev
            prev = edges

    def test_parallel_matches_serial(self):
        ds = self._ds()
        assert build_assoc(ds, workers=4).edges == build_assoc(ds).edges

    def test_indicator_columns_excluded(self):
        from cbench.dataset import InterventionSpec, attach_interventions
        ds = make_factor_ds("t", x=["a", "b"] * 4, flag=["0", "1"] * 4)
        ds = attach_interventions(ds, InterventionSpec("flag", {"0": (), "1": ("x",)}))
        g = build_assoc(ds, threshold=0.0)
        assert "flag" not in g.nodes


class TestLinkCommunities:
    def test_triangle_single_community(self):
        g = AssocGraph(("A", "B", "C"),
                       (("A", "B", .9), ("A", "C", .9), ("B", "C", .9)))
        out = link_communities(g)
        assert len(set(out.communities.values())) == 1
        assert out.partition_density == pytest.approx(1.0)

    def test_two_triangles_split(self):
        g = AssocGraph(("A", "B", "C", "D", "E"),
                       (("A", "B", .9), ("A", "C", .9), ("B", "C", .9),
                        ("C", "D", .9), ("C", "E", .9), ("D", "E", .9)))
        out = link_communities(g)
        left = {out.communities[e] for e in [("A", "B"), ("A", "C"), ("B", "C")]}
        right = {out.communities[e] for e in [("C", "D"), ("C", "E"), ("D", "E")]}
        assert len(left) == 1 and len(right) == 1 and left != right

    def test_star_zero_density_coarsest(self):
        g = AssocGraph(("A", "B", "C", "D"),
                       (("A", "B", .9), ("A", "C", .9), ("A", "D", .9)))
        out = link_communities(g)
        assert out.partition_density == 0.0
        assert len(set(out.communities.values())) == 1

    def test_empty_graph(self):
        out = link_communities(AssocGraph(("A", "B"), ()))
        assert out.communities == {}

    @pytest.mark.parametrize("linkage", ["single", "complete", "average", "ward"])
    def test_density_matches_brute_force_over_cuts(self, linkage):
        # graphs with <= 8 edges: maximize D over every dendrogram cut by hand
        from scipy.cluster.hierarchy import fcluster, linkage as scipy_linkage
        from scipy.spatial.distance import squareform
        from cbench.assoc import _edge_similarity

        rng = np.random.default_rng(4)
        for trial in range(6):
            nodes = tuple("ABCDEF")
            cand = list(itertools.combinations(nodes, 2))
            rng.shuffle(cand)
            pairs = sorted(cand[:rng.integers(2, 9)])
            g = AssocGraph(nodes, tuple((a, b, 0.9) for a, b in pairs))
            out = link_communities(g, link=linkage)
            edges = g.edge_pairs()
            nbrs = {v: set() for v in nodes}
            for a, b in edges:
                nbrs[a].add(b)
                nbrs[b].add(a)
            dist = 1.0 - _edge_similarity(edges, nbrs)
            z = scipy_linkage(squareform(dist, checks=False), method=linkage)
            best = 0.0
            cuts = [-1.0] + sorted({float(h) for h in z[:, 2]})
            for cut in cuts:
                labels = fcluster(z, t=cut, criterion="distance")
                best = max(best, partition_density(edges, labels))
            assert out.partition_density == pytest.approx(best, abs=1e-12)


class TestExportEdgelist:
    def test_one_edge(self):
        g = AssocGraph(("A", "B"), (("A", "B", 0.5),))
        assert export_edgelist(g) == b"from,to,weight\nA,B,0.5\n"

    def test_empty(self):
        assert export_edgelist(AssocGraph((), ())) == b"from,to,weight\n"

    def test_round_trip_skeleton_into_graph_import(self):
        g = AssocGraph(("A", "B", "C"), (("A", "B", 0.9), ("B", "C", 0.4)))
        dag = import_edgelist(export_edgelist(g))
        assert set(dag.arcs) == {("A", "B"), ("B", "C")}
