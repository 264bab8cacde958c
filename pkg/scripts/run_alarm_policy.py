"""Learn an optimal blood-pressure policy on the monitoring network.

Samples the reference ALARM distribution, runs bootstrapped hill climbing
with the AIC score (101 iterations, 0.51 thresholds), fits parameters, then
evaluates every cardiac-output / peripheral-resistance decision pair against
a payoff of 1 for NORMAL, -0.5 for HIGH and -1 for LOW blood pressure.
"""

import argparse
import time

from cbench.decision import build_diagram, export_policy_csv, learn_policy
from cbench.inference import fit, sample
from cbench.learn import (BootstrapConfig, SearchConfig, averaged_network,
                          bootstrap_learn)
from cbench.refnets import alarm_network
from cbench.scores import ScoreSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=20_000)
    ap.add_argument("--bootstraps", type=int, default=101)
    ap.add_argument("--threshold", type=float, default=0.51)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None, help="write the policy table CSV here")
    args = ap.parse_args()

    t0 = time.time()
    truth = alarm_network()
    ds = sample(truth, args.rows, seed=7)
    print(f"sampled {ds.n_rows} rows over {len(ds.columns)} variables")

    cfg = SearchConfig(algorithm="hc", score=ScoreSpec("aic"), seed=args.seed)
    bcfg = BootstrapConfig(iterations=args.bootstraps, sample_fraction=1.0,
                           resample=True, edge_threshold=args.threshold,
                           direction_threshold=args.threshold,
                           seed=args.seed, workers=args.workers)
    strengths, _ = bootstrap_learn(ds, cfg, bcfg)
    dag = averaged_network(strengths, args.threshold, args.threshold)
    print(f"averaged network: {len(dag.arcs)} arcs "
          f"({time.time() - t0:.0f}s); BP parents: {dag.parents('BP')}")

    bn = fit(ds, dag, method="bayes", iss=1.0)
    diagram = build_diagram(bn, "BP", {"NORMAL": 1.0, "HIGH": -0.5, "LOW": -1.0},
                            ["CO", "TPR"])
    table = learn_policy(diagram, mc_samples=100_000, seed=5)
    print("\nCO        TPR       payoff")
    for (co, tpr), payoff in table.rows:
        print(f"{co:<9} {tpr:<9} {payoff: .4f}")
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(export_policy_csv(table))
        print(f"\nwrote {args.out}")
    print(f"total {time.time() - t0:.0f}s")


if __name__ == "__main__":
    main()
