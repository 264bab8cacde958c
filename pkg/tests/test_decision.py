import numpy as np
import pytest

from cbench.decision import (build_diagram, expected_payoff, export_policy_csv,
                             learn_policy)
from cbench.errors import ColumnError
from cbench.graph import Dag
from cbench.inference import Cpt, FittedBn


def decision_bn(p_plus_given_a=0.8, p_plus_given_b=0.3):
    """D -> U with U in {plus, minus}."""
    dag = Dag(("D", "U"), (("D", "U"),))
    pd = Cpt("D", (), ("a", "b"), (), np.array([[0.5, 0.5]]))
    pu = Cpt("U", ("D",), ("minus", "plus"), (("a", "b"),),
             np.array([[1 - p_plus_given_a, p_plus_given_a],
                       [1 - p_plus_given_b, p_plus_given_b]]))
    return FittedBn(dag, {"D": pd, "U": pu})


def confounded_bn():
    """C -> D, C -> U, D -> U: observational and interventional answers differ."""
    dag = Dag(("C", "D", "U"), (("C", "D"), ("C", "U"), ("D", "U")))
    pc = Cpt("C", (), ("0", "1"), (), np.array([[0.5, 0.5]]))
    pd = Cpt("D", ("C",), ("a", "b"), (("0", "1"),),
             np.array([[0.9, 0.1], [0.1, 0.9]]))
    pu = Cpt("U", ("C", "D"), ("minus", "plus"),
             (("0", "1"), ("a", "b")),
             np.array([[0.9, 0.1], [0.8, 0.2], [0.3, 0.7], [0.1, 0.9]]))
    return FittedBn(dag, {"C": pc, "D": pd, "U": pu})


class TestBuildDiagram:
    def test_valid(self):
        d = build_diagram(decision_bn(), "U", {"plus": 1.0, "minus": -1.0}, ["D"])
        assert d.decision_vars == ("D",)

    def test_payoff_out_of_range(self):
        with pytest.raises(ColumnError, match=r"outside \[-1, 1\]"):
            build_diagram(decision_bn(), "U", {"plus": 2.0, "minus": 0.0}, ["D"])

    def test_payoff_must_cover_levels(self):
        with pytest.raises(ColumnError, match="missing"):
            build_diagram(decision_bn(), "U", {"plus": 1.0}, ["D"])

    def test_utility_not_a_decision(self):
        with pytest.raises(ColumnError):
            build_diagram(decision_bn(), "U", {"plus": 1.0, "minus": 0.0}, ["U"])

    def test_empty_decision_set_rejected(self):
        with pytest.raises(ColumnError, match="empty"):
            build_diagram(decision_bn(), "U", {"plus": 1.0, "minus": 0.0}, [])

    def test_single_level_utility_constant_payoff(self):
        dag = Dag(("D", "U"), (("D", "U"),))
        pd = Cpt("D", (), ("a", "b"), (), np.array([[0.5, 0.5]]))
        pu = Cpt("U", ("D",), ("only",), (("a", "b"),), np.array([[1.0], [1.0]]))
        bn = FittedBn(dag, {"D": pd, "U": pu})
        d = build_diagram(bn, "U", {"only": 1.0}, ["D"])
        table = learn_policy(d, mc_samples=500, seed=0)
        assert all(p == pytest.approx(1.0) for _, p in table.rows)


class TestExpectedPayoff:
    def test_hand_value_exact(self):
        d = build_diagram(decision_bn(), "U", {"plus": 1.0, "minus": -1.0}, ["D"])
        # EU(a) = 0.8 - 0.2 = 0.6
        assert expected_payoff(d, {"D": "a"}, method="exact") == pytest.approx(0.6)
        assert expected_payoff(d, {"D": "b"}, method="exact") == pytest.approx(-0.4)

    def test_mc_within_three_se_of_exact(self):
        d = build_diagram(decision_bn(), "U", {"plus": 1.0, "minus": -1.0}, ["D"])
        n = 40_000
        mc = expected_payoff(d, {"D": "a"}, mc_samples=n, seed=3, method="mc")
        # payoff variance for a +-1 outcome with p=0.8 is 4 p (1-p)
        se = np.sqrt(4 * 0.8 * 0.2 / n)
        assert abs(mc - 0.6) <= 3 * se

    def test_decision_acts_as_intervention_not_conditioning(self):
        bn = confounded_bn()
        d = build_diagram(bn, "U", {"plus": 1.0, "minus": 0.0}, ["D"])
        # do(D=b): C stays at its prior, so payoff = 0.5*0.2 + 0.5*0.9
        assert expected_payoff(d, {"D": "b"}, method="exact") == \
            pytest.approx(0.5 * 0.2 + 0.5 * 0.9, abs=1e-9)

    def test_utility_independent_of_decision(self):
        dag = Dag(("D", "U"))
        pd = Cpt("D", (), ("a", "b"), (), np.array([[0.5, 0.5]]))
        pu = Cpt("U", (), ("minus", "plus"), (), np.array([[0.3, 0.7]]))
        bn = FittedBn(dag, {"D": pd, "U": pu})
        d = build_diagram(bn, "U", {"plus": 1.0, "minus": -1.0}, ["D"])
        pa = expected_payoff(d, {"D": "a"}, method="exact")
        pb = expected_payoff(d, {"D": "b"}, method="exact")
        assert pa == pytest.approx(pb, abs=1e-12)

    def test_missing_decision_assignment_rejected(self):
        d = build_diagram(decision_bn(), "U", {"plus": 1.0, "minus": 0.0}, ["D"])
        with pytest.raises(ColumnError, match="missing decision"):
            expected_payoff(d, {}, method="exact")


class TestLearnPolicy:
    def test_sorted_descending(self):
        d = build_diagram(decision_bn(), "U", {"plus": 1.0, "minus": -1.0}, ["D"])
        table = learn_policy(d, method="exact")
        assert table.rows[0] == (("a",), pytest.approx(0.6))
        assert table.rows[1] == (("b",), pytest.approx(-0.4))
        payoffs = [p for _, p in table.rows]
        assert payoffs == sorted(payoffs, reverse=True)

    def test_all_zero_payoffs_stable_order(self):
        d = build_diagram(decision_bn(), "U", {"plus": 0.0, "minus": 0.0}, ["D"])
        table = learn_policy(d, method="exact")
        assert [levels for levels, _ in table.rows] == [("a",), ("b",)]

    def test_affine_invariance_of_ordering(self):
        bn = confounded_bn()
        base = build_diagram(bn, "U", {"plus": 0.9, "minus": -0.4}, ["D"])
        # payoffs scaled by 0.5 and shifted by 0.1 preserve the argmax order
        shifted = build_diagram(bn, "U", {"plus": 0.9 * 0.5 + 0.1,
                                          "minus": -0.4 * 0.5 + 0.1}, ["D"])
        t1 = learn_policy(base, method="exact")
        t2 = learn_policy(shifted, method="exact")
        assert [lv for lv, _ in t1.rows] == [lv for lv, _ in t2.rows]

    def test_joint_space_guard(self):
        bn = _wide_bn(21)  # 2^21 joint assignments
        diagram = build_diagram(bn, "U", {"x": 0.0}, [f"D{i}" for i in range(21)])
        with pytest.raises(ColumnError, match="1e6"):
            learn_policy(diagram, mc_samples=10, method="mc")

    def test_seed_determinism_mc(self):
        d = build_diagram(decision_bn(), "U", {"plus": 1.0, "minus": -1.0}, ["D"])
        t1 = learn_policy(d, mc_samples=2000, seed=11, method="mc")
        t2 = learn_policy(d, mc_samples=2000, seed=11, method="mc")
        assert t1.rows == t2.rows


def _wide_bn(k):
    nodes = tuple(f"D{i}" for i in range(k)) + ("U",)
    dag = Dag(nodes)
    cpts = {f"D{i}": Cpt(f"D{i}", (), ("a", "b"), (), np.array([[0.5, 0.5]]))
            for i in range(k)}
    cpts["U"] = Cpt("U", (), ("x",), (), np.array([[1.0]]))
    return FittedBn(dag, cpts)


def test_policy_csv_layout():
    d = build_diagram(decision_bn(), "U", {"plus": 1.0, "minus": -1.0}, ["D"])
    table = learn_policy(d, method="exact")
    text = export_policy_csv(table).decode()
    lines = text.strip().split("\n")
    assert lines[0] == "D,payoff"
    assert lines[1].startswith("a,0.6")
