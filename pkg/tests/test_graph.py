import numpy as np
import pytest

from cbench.errors import ConstraintError, CycleError, ParseError
from cbench.graph import (ArcConstraints, Dag, consistent_extension, export_edgelist,
                          import_edgelist, random_dag, to_cpdag)

from conftest import all_three_node_dags


class TestEdits:
    def test_reverse(self):
        g = Dag(("A", "B"), (("A", "B"),))
        assert g.reverse_arc("A", "B").arcs == (("B", "A"),)

    def test_two_cycle_rejected(self):
        g = Dag(("A", "B"), (("A", "B"),))
        with pytest.raises(CycleError):
            g.add_arc("B", "A")

    def test_cycle_error_lists_nodes(self):
        g = Dag(("A", "B", "C"), (("A", "B"), ("B", "C")))
        with pytest.raises(CycleError) as exc:
            g.add_arc("C", "A")
        assert set(exc.value.cycle) == {"A", "B", "C"}

    def test_remove_missing_arc(self):
        with pytest.raises(ConstraintError):
            Dag(("A", "B")).remove_arc("A", "B")

    def test_edits_return_new_values(self):
        g = Dag(("A", "B"))
        g2 = g.add_arc("A", "B")
        assert g.arcs == () and g2.arcs == (("A", "B"),)

    def test_self_arc_rejected(self):
        with pytest.raises(ConstraintError):
            Dag(("A",), (("A", "A"),))


class TestEdgelist:
    def test_simple(self):
        g = import_edgelist(b"from,to\nA,B\n")
        assert g.arcs == (("A", "B"),)

    def test_cyclic_rejected(self):
        with pytest.raises(CycleError):
            import_edgelist(b"from,to\nA,B\nB,A\n")

    def test_unknown_node_with_node_list(self):
        with pytest.raises(ParseError, match="unknown node"):
            import_edgelist(b"from,to\nA,Z\n", nodes=["A", "B"])

    def test_isolated_nodes_preserved(self):
        g = import_edgelist(b"from,to\nA,B\n", nodes=["A", "B", "C"])
        assert g.nodes == ("A", "B", "C")

    def test_header_required(self):
        with pytest.raises(ParseError, match="header"):
            import_edgelist(b"A,B\nB,C\n")

    def test_constraint_list_may_be_cyclic(self):
        arcs = import_edgelist(b"from,to\nA,B\nB,A\n", require_acyclic=False)
        assert set(arcs) == {("A", "B"), ("B", "A")}

    def test_round_trip(self):
        g = Dag(("A", "B", "C"), (("A", "B"), ("A", "C")))
        assert import_edgelist(export_edgelist(g), nodes=list(g.nodes)).arcs == g.arcs


class TestCpdag:
    def test_single_arc_undirected(self):
        c = to_cpdag(Dag(("A", "B"), (("A", "B"),)))
        assert c.directed == frozenset()
        assert c.undirected == frozenset({frozenset(("A", "B"))})

    def test_v_structure_stays_directed(self):
        c = to_cpdag(Dag(("A", "B", "C"), (("A", "C"), ("B", "C"))))
        assert c.directed == frozenset({("A", "C"), ("B", "C")})
        assert c.undirected == frozenset()

    def test_chain_fully_undirected(self):
        # the class {A->B->C, C->B->A, B->A + B->C} shares one CPDAG
        chain = Dag(("A", "B", "C"), (("A", "B"), ("B", "C")))
        rev = Dag(("A", "B", "C"), (("B", "A"), ("C", "B")))
        fork = Dag(("A", "B", "C"), (("B", "A"), ("B", "C")))
        assert to_cpdag(chain) == to_cpdag(rev) == to_cpdag(fork)
        assert to_cpdag(chain).directed == frozenset()

    def test_extension_round_trip(self):
        for g in all_three_node_dags():
            c = to_cpdag(g)
            ext = consistent_extension(c)
            assert to_cpdag(ext) == c

    def test_equivalence_classes_partition_25_dags(self):
        groups = {}
        for g in all_three_node_dags():
            c = to_cpdag(g)
            key = (c.directed, c.undirected)
            groups.setdefault(key, []).append(g)
        assert sum(len(v) for v in groups.values()) == 25
        assert len(groups) == 11  # known count of 3-node equivalence classes


class TestConstraints:
    def test_overlap_rejected(self):
        with pytest.raises(ConstraintError):
            ArcConstraints.of(blacklist=[("A", "B")], whitelist=[("A", "B")])

    def test_cyclic_whitelist_rejected(self):
        with pytest.raises(CycleError):
            ArcConstraints.of(whitelist=[("A", "B"), ("B", "A")])


class TestRandomDag:
    def test_deterministic_per_seed(self):
        a = random_dag(["A", "B", "C", "D"], max_parents=2, seed=5)
        b = random_dag(["A", "B", "C", "D"], max_parents=2, seed=5)
        assert a.arcs == b.arcs

    def test_zero_parents_empty(self):
        assert random_dag(["A", "B", "C"], max_parents=0, seed=1).arcs == ()

    def test_all_25_dags_reachable(self):
        seen = set()
        for i in range(10_000):
            g = random_dag(["A", "B", "C"], max_parents=2, seed=i)
            seen.add(g.arcs)
        assert len(seen) == 25

    def test_respects_parent_cap(self):
        for i in range(50):
            g = random_dag([f"N{k}" for k in range(8)], max_parents=2, seed=i)
            assert all(len(g.parents(v)) <= 2 for v in g.nodes)


def test_topological_order_and_reachability():
    g = Dag(("A", "B", "C", "D"), (("A", "B"), ("B", "C"), ("A", "D")))
    order = g.topological_order()
    pos = {v: i for i, v in enumerate(order)}
    assert all(pos[a] < pos[b] for a, b in g.arcs)
    desc = g.reachability()
    assert desc["A"] == {"B", "C", "D"}
    assert desc["C"] == set()
    assert g.has_path("A", "C") and not g.has_path("C", "A")
