import numpy as np
import pytest

from cbench.dataset import Column, Dataset
from cbench.errors import ConstraintError
from cbench.graph import ArcConstraints, Dag, to_cpdag
from cbench.inference import Cpt, FittedBn, sample
from cbench.learn import (BootstrapConfig, SearchConfig, StrengthTable,
                          aggregate_strengths, averaged_network, bootstrap_learn,
                          chow_liu, grow_shrink, hill_climb, learn_structure,
                          pc_stable, tabu, validate)
from cbench.scores import LocalScoreCache, ScoreSpec

from conftest import all_three_node_dags, make_factor_ds


def pair_bn(p_b_given_a=0.9):
    dag = Dag(("A", "B"), (("A", "B"),))
    pa = Cpt("A", (), ("f", "t"), (), np.array([[0.5, 0.5]]))
    pb = Cpt("B", ("A",), ("f", "t"), (("f", "t"),),
             np.array([[p_b_given_a, 1 - p_b_given_a],
                       [1 - p_b_given_a, p_b_given_a]]))
    return FittedBn(dag, {"A": pa, "B": pb})


class TestHillClimb:
    def test_recovers_pair_dependence_cpdag(self):
        ds = sample(pair_bn(), 10_000, seed=1)
        g = hill_climb(ds, SearchConfig(algorithm="hc", score=ScoreSpec("bic")))
        # exhaustive oracle over the three candidate structures
        cache = LocalScoreCache(ds, ScoreSpec("bic"))
        cand = [Dag(("A", "B")), Dag(("A", "B"), (("A", "B"),)),
                Dag(("A", "B"), (("B", "A"),))]
        best = max(cand, key=cache.network)
        assert len(best.arcs) == 1
        c = to_cpdag(g)
        assert c.undirected == frozenset({frozenset(("A", "B"))})

    def test_blacklist_everything_gives_empty(self, corpus3):
        ds = corpus3["chain"]
        bl = [(a, b) for a in "ABC" for b in "ABC" if a != b]
        cfg = SearchConfig(algorithm="hc", constraints=ArcConstraints.of(blacklist=bl))
        assert hill_climb(ds, cfg).arcs == ()

    def test_whitelist_is_non_removable(self, corpus3):
        ds = corpus3["independent"]
        cfg = SearchConfig(algorithm="hc",
                           constraints=ArcConstraints.of(whitelist=[("A", "B")]))
        assert ("A", "B") in hill_climb(ds, cfg).arcs

    def test_score_never_decreases_vs_start(self, corpus3):
        for ds in corpus3.values():
            cache = LocalScoreCache(ds, ScoreSpec("bic"))
            start = Dag(("A", "B", "C"), (("C", "A"),))
            cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"), start=start)
            out = hill_climb(ds, cfg)
            assert cache.network(out) >= cache.network(start) - 1e-9

    def test_start_conflicting_with_blacklist_rejected(self):
        with pytest.raises(ConstraintError):
            SearchConfig(algorithm="hc",
                         start=Dag(("A", "B"), (("A", "B"),)),
                         constraints=ArcConstraints.of(blacklist=[("A", "B")]))

    def test_max_parents_cap(self, corpus3):
        ds = corpus3["dense"]
        g = hill_climb(ds, SearchConfig(algorithm="hc", max_parents=1))
        assert all(len(g.parents(v)) <= 1 for v in g.nodes)

    def test_deterministic_per_seed(self, corpus3):
        ds = corpus3["dense"]
        cfg = SearchConfig(algorithm="hc", restarts=3, seed=7)
        assert hill_climb(ds, cfg).arcs == hill_climb(ds, cfg).arcs


class TestTabu:
    def test_never_below_hill_climb(self, corpus3):
        for ds in corpus3.values():
            cache = LocalScoreCache(ds, ScoreSpec("bic"))
            cfg_h = SearchConfig(algorithm="hc", score=ScoreSpec("bic"))
            cfg_t = SearchConfig(algorithm="tabu", score=ScoreSpec("bic"))
            s_h = cache.network(hill_climb(ds, cfg_h))
            s_t = cache.network(tabu(ds, cfg_t))
            assert s_t >= s_h - 1e-9

    def test_escapes_xor_trap_to_global_optimum(self, corpus3):
        ds = corpus3["xor_trap"]
        spec = ScoreSpec("bic")
        cache = LocalScoreCache(ds, spec)
        stuck = hill_climb(ds, SearchConfig(algorithm="hc", score=spec))
        assert stuck.arcs == ()  # greedy from empty is provably trapped here
        best = max(all_three_node_dags(), key=cache.network)
        got = tabu(ds, SearchConfig(algorithm="tabu", score=spec))
        assert cache.network(got) == pytest.approx(cache.network(best), abs=1e-9)

    def test_sachs_pipeline_recovers_validated_arcs(self):
        from cbench.refnets import sachs_interventional_dataset

        ds = sachs_interventional_dataset()
        spec = ScoreSpec("mbde", iss=15.0)
        start = hill_climb(ds, SearchConfig(algorithm="hc", score=spec, seed=3))
        g = tabu(ds, SearchConfig(algorithm="tabu", score=spec, start=start, seed=3))
        for arc in [("Raf", "Mek"), ("Mek", "Erk"), ("Erk", "Akt"),
                    ("PKC", "P38"), ("PKC", "Jnk")]:
            assert arc in set(g.arcs)


class TestConstraintBased:
    def _ds3(self, a, b, c):
        return Dataset("t", (
            Column("A", "factor", np.asarray(a, dtype=np.int64), ("0", "1")),
            Column("B", "factor", np.asarray(b, dtype=np.int64), ("0", "1")),
            Column("C", "factor", np.asarray(c, dtype=np.int64), ("0", "1"))))

    def _collider_data(self, n=10_000, seed=11):
        rng = np.random.default_rng(seed)
        a = rng.integers(0, 2, n)
        b = rng.integers(0, 2, n)
        c = ((a & b) ^ (rng.random(n) < 0.05)).astype(np.int64)
        return self._ds3(a, b, c)

    def _chain_data(self, n=10_000, seed=13):
        rng = np.random.default_rng(seed)
        a = rng.integers(0, 2, n)
        b = (a ^ (rng.random(n) < 0.1)).astype(np.int64)
        c = (b ^ (rng.random(n) < 0.1)).astype(np.int64)
        return self._ds3(a, b, c)

    @pytest.mark.parametrize("learner", [grow_shrink, pc_stable])
    def test_two_independent_variables_empty(self, learner):
        rng = np.random.default_rng(2)
        ds = make_factor_ds("t",
                            x=[str(v) for v in rng.integers(0, 2, 4000)],
                            y=[str(v) for v in rng.integers(0, 2, 4000)])
        assert learner(ds, SearchConfig(algorithm="gs")).arcs == ()

    @pytest.mark.parametrize("learner", [grow_shrink, pc_stable])
    def test_recovers_v_structure(self, learner):
        g = learner(self._collider_data(), SearchConfig(algorithm="gs"))
        assert set(g.arcs) == {("A", "C"), ("B", "C")}

    @pytest.mark.parametrize("learner", [grow_shrink, pc_stable])
    def test_chain_skeleton_without_shortcut(self, learner):
        g = learner(self._chain_data(), SearchConfig(algorithm="gs"))
        skeleton = {frozenset(arc) for arc in g.arcs}
        assert skeleton == {frozenset(("A", "B")), frozenset(("B", "C"))}

    def test_pc_five_independent_variables_empty(self):
        rng = np.random.default_rng(3)
        cols = {f"v{i}": [str(x) for x in rng.integers(0, 2, 2500)] for i in range(5)}
        ds = make_factor_ds("t", **cols)
        assert pc_stable(ds, SearchConfig(algorithm="pc_stable")).arcs == ()

    def test_pc_blacklist_respected_in_extension(self):
        ds = self._chain_data()
        cfg = SearchConfig(algorithm="pc_stable",
                           constraints=ArcConstraints.of(blacklist=[("B", "A")]))
        g = pc_stable(ds, cfg)
        assert ("B", "A") not in set(g.arcs)
        assert frozenset(("A", "B")) in {frozenset(a) for a in g.arcs}

    def test_gs_degenerate_column_skipped(self):
        ds = make_factor_ds("t", x=["a", "b"] * 50, cst=["k"] * 100)
        g = grow_shrink(ds, SearchConfig(algorithm="gs"))
        assert "cst" in g.nodes and not g.parents("cst") and not g.children("cst")


class TestChowLiu:
    def test_two_variables_single_arc(self):
        rng = np.random.default_rng(5)
        a = rng.integers(0, 2, 500)
        b = (a ^ (rng.random(500) < 0.2)).astype(np.int64)
        ds = Dataset("t", (Column("A", "factor", a, ("0", "1")),
                           Column("B", "factor", b, ("0", "1"))))
        assert chow_liu(ds).arcs == (("A", "B"),)

    def test_tree_follows_mutual_information_order(self):
        rng = np.random.default_rng(6)
        n = 8000
        a = rng.integers(0, 2, n)
        b = (a ^ (rng.random(n) < 0.05)).astype(np.int64)  # MI(A,B) largest
        c = (a ^ (rng.random(n) < 0.25)).astype(np.int64)  # MI(A,C) middle
        ds = Dataset("t", (Column("A", "factor", a, ("0", "1")),
                           Column("B", "factor", b, ("0", "1")),
                           Column("C", "factor", c, ("0", "1"))))
        g = chow_liu(ds)
        assert set(g.arcs) == {("A", "B"), ("A", "C")}

    def test_independent_variables_still_spanning_tree(self, corpus3):
        g = chow_liu(corpus3["independent"])
        assert len(g.arcs) == 2  # spanning tree over three nodes
        assert g.parents("A") == ()  # rooted at the first variable


class TestBootstrap:
    def test_counting_oracle(self):
        arcs = [((("A", "B")),), (("A", "B"),), (("B", "A"),)]
        st = aggregate_strengths(("A", "B"), arcs)
        assert st.strength("A", "B") == pytest.approx(1.0)
        assert st.direction("A", "B") == pytest.approx(2 / 3)
        assert st.direction("B", "A") == pytest.approx(1 / 3)

    def test_unanimous(self):
        st = aggregate_strengths(("A", "B"), [(("A", "B"),)] * 4)
        assert st.strength("A", "B") == 1.0
        assert st.direction("A", "B") == 1.0

    def test_absent_pair_is_half_direction(self):
        st = aggregate_strengths(("A", "B", "C"), [(("A", "B"),)])
        assert st.strength("A", "C") == 0.0
        assert st.direction("A", "C") == 0.5

    def test_worker_counts_bit_identical(self, corpus3):
        ds = corpus3["chain"]
        cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"), seed=9)
        tables = []
        for w in (1, 4, 8):
            bcfg = BootstrapConfig(iterations=16, sample_fraction=0.9, seed=17,
                                   workers=w)
            st, dags = bootstrap_learn(ds, cfg, bcfg)
            tables.append(st.to_json())
            assert len(dags) == 16
        assert tables[0] == tables[1] == tables[2]

    def test_no_resample_uses_random_starts(self, corpus3):
        ds = corpus3["fork"]
        cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"), seed=1)
        bcfg = BootstrapConfig(iterations=8, resample=False, seed=5)
        st, dags = bootstrap_learn(ds, cfg, bcfg)
        assert st.iterations == 8

    def test_no_resample_requires_score_based(self, corpus3):
        cfg = SearchConfig(algorithm="gs")
        with pytest.raises(ConstraintError):
            bootstrap_learn(corpus3["fork"], cfg,
                            BootstrapConfig(iterations=2, resample=False))

    def test_strengths_in_unit_interval(self, corpus3):
        cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"), seed=2)
        st, _ = bootstrap_learn(corpus3["dense"], cfg,
                                BootstrapConfig(iterations=10, seed=3))
        for (a, b), (s, d) in st.entries.items():
            assert 0.0 <= s <= 1.0 and 0.0 <= d <= 1.0

    def test_cancellation_via_progress(self, corpus3):
        cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"))
        with pytest.raises(InterruptedError):
            bootstrap_learn(corpus3["chain"], cfg,
                            BootstrapConfig(iterations=10, seed=1),
                            progress=lambda done, total: done < 3)


class TestAveragedNetwork:
    def test_two_thirds_direction_kept_at_051(self):
        st = aggregate_strengths(("A", "B"),
                                 [(("A", "B"),), (("A", "B"),), (("B", "A"),)])
        g = averaged_network(st, 0.51, 0.51)
        assert g.arcs == (("A", "B"),)

    def test_edge_threshold_one_keeps_nothing(self):
        st = aggregate_strengths(("A", "B"),
                                 [(("A", "B"),), (("A", "B"),), ()])
        assert averaged_network(st, 1.0, 0.5).arcs == ()

    def test_majority_orientation_below_direction_threshold(self):
        st = StrengthTable(("A", "B"), {("A", "B"): (1.0, 0.55)})
        g = averaged_network(st, 0.5, 0.9)
        assert g.arcs == (("A", "B"),)
        st2 = StrengthTable(("A", "B"), {("A", "B"): (1.0, 0.45)})
        assert averaged_network(st2, 0.5, 0.9).arcs == (("B", "A"),)

    def test_exact_tie_orients_by_node_order(self):
        st = StrengthTable(("B", "A"), {("A", "B"): (1.0, 0.5)})
        g = averaged_network(st, 0.5, 0.9)
        assert g.arcs == (("B", "A"),)  # B precedes A in node order

    def test_cycles_resolved_by_dropping_weakest(self):
        st = StrengthTable(("A", "B", "C"), {
            ("A", "B"): (1.0, 0.9),
            ("B", "C"): (0.9, 0.9),
            ("A", "C"): (0.8, 0.1)})  # implies C -> A, closing a cycle
        g = averaged_network(st, 0.5, 0.5)
        assert g.arcs == (("A", "B"), ("B", "C"))

    def test_monotone_edge_threshold(self, corpus3):
        cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"), seed=4)
        st, _ = bootstrap_learn(corpus3["dense"], cfg,
                                BootstrapConfig(iterations=12, seed=6))
        prev = None
        for thr in np.linspace(0, 1, 9):
            pairs = {frozenset(a) for a in averaged_network(st, float(thr), 0.5).arcs}
            if prev is not None:
                assert pairs <= prev
            prev = pairs

    def test_rethreshold_is_pure_function(self, corpus3):
        cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"), seed=4)
        st, _ = bootstrap_learn(corpus3["chain"], cfg,
                                BootstrapConfig(iterations=6, seed=6))
        assert averaged_network(st, 0.51, 0.51).arcs == \
            averaged_network(st, 0.51, 0.51).arcs


class TestValidate:
    def test_fair_coin_loss_near_ln2(self):
        rng = np.random.default_rng(21)
        ds = Dataset("coin", (Column("X", "factor",
                                     rng.integers(0, 2, 4000), ("h", "t")),))
        cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"), seed=1)
        rep = validate(ds, cfg, mode="kfold", k=10)
        assert rep.mean_loss == pytest.approx(np.log(2), abs=0.02)
        assert rep.folds == 10

    def test_deterministic_variable_loss_near_zero(self):
        ds = Dataset("det", (Column("X", "factor",
                                    np.zeros(2000, dtype=np.int64), ("a", "b")),))
        cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"), seed=1)
        rep = validate(ds, cfg, mode="kfold", k=5)
        assert rep.mean_loss < 0.01

    def test_true_structure_beats_empty_graph(self):
        rng = np.random.default_rng(33)
        n = 3000
        a = rng.integers(0, 2, n)
        b = (a ^ (rng.random(n) < 0.1)).astype(np.int64)
        ds = Dataset("dep", (Column("A", "factor", a, ("0", "1")),
                             Column("B", "factor", b, ("0", "1"))))
        true_g = Dag(("A", "B"), (("A", "B"),))
        empty_g = Dag(("A", "B"))
        cfg_true = SearchConfig(algorithm="hc", score=ScoreSpec("bic"),
                                start=true_g,
                                constraints=ArcConstraints.of(whitelist=[("A", "B")]),
                                seed=2)
        cfg_empty = SearchConfig(
            algorithm="hc", score=ScoreSpec("bic"), start=empty_g, seed=2,
            constraints=ArcConstraints.of(
                blacklist=[("A", "B"), ("B", "A")]))
        loss_true = validate(ds, cfg_true, mode="kfold", k=5).mean_loss
        loss_empty = validate(ds, cfg_empty, mode="kfold", k=5).mean_loss
        assert loss_true <= loss_empty

    def test_total_loss_is_sum_of_per_variable(self, corpus3):
        cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"), seed=3)
        rep = validate(corpus3["chain"], cfg, mode="holdout", fraction=0.3)
        assert rep.mean_loss == pytest.approx(sum(rep.per_variable_loss.values()),
                                              abs=1e-9)


class TestModelDocument:
    def test_round_trip(self, corpus3):
        from cbench import model_io
        ds = corpus3["chain"]
        cfg = SearchConfig(algorithm="hc", score=ScoreSpec("bic"), seed=4)
        bcfg = BootstrapConfig(iterations=6, seed=6)
        st, _ = bootstrap_learn(ds, cfg, bcfg)
        dag = averaged_network(st, 0.5, 0.5)
        from cbench.inference import fit
        bn = fit(ds, dag, method="bayes")
        doc = model_io.model_document(dag=dag, strengths=st, search_config=cfg,
                                      bootstrap_config=bcfg, fitted=bn)
        data = model_io.dump_model(doc)
        again = model_io.parse_model(data)
        assert model_io.model_dag(again).arcs == dag.arcs
        st2 = model_io.model_strengths(again)
        assert st2.to_json() == st.to_json()
        bn2 = model_io.model_fitted(again)
        assert np.array_equal(bn2.cpts["B"].table, bn.cpts["B"].table)

    def test_version_mismatch_detected(self):
        from cbench import model_io
        from cbench.errors import ModelFormatError
        doc = {"format": "cbench-model", "version": 999, "nodes": [], "arcs": []}
        with pytest.raises(ModelFormatError, match="migration"):
            model_io.parse_model(doc)
