"""Batch command line for the workbench.

Every subcommand takes --config pointing at a JSON file whose keys mirror the
flag names; explicit flags override the file. Artifacts flow between commands
as CSV (data, edge lists, policies) and model documents (JSON).
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import assoc as assoc_mod
from . import dataset as dataset_mod
from . import decision as decision_mod
from . import graph as graph_mod
from . import inference as inference_mod
from . import learn as learn_mod
from . import model_io
from .errors import CbenchError
from .scores import ScoreSpec
from .sessions import Session


def _merge_config(ctx: click.Context, config_path: str | None, *required) -> None:
    """Apply config-file values to parameters the user left at their default,
    then enforce options that must come from either surface."""
    if config_path:
        doc = json.loads(Path(config_path).read_text())
        for key, value in doc.items():
            param = key.replace("-", "_")
            if param not in ctx.params:
                raise click.UsageError(f"unknown config key {key!r}")
            src = ctx.get_parameter_source(param)
            if src == click.core.ParameterSource.DEFAULT:
                ctx.params[param] = value
    for name in required:
        if ctx.params.get(name) is None:
            flag = "--" + name.replace("_", "-")
            raise click.UsageError(f"missing option {flag!r} (flag or config file)")


def _load_data(path: str, delimiter: str, header: bool, threshold: int):
    with open(path, "rb") as fh:
        return dataset_mod.load_csv(fh, delimiter=delimiter, header=header,
                                    factor_level_threshold=threshold,
                                    name=Path(path).name)


def _read_constraints(blacklist: str | None, whitelist: str | None):
    bl = graph_mod.import_edgelist(Path(blacklist).read_bytes(), require_acyclic=False) \
        if blacklist else ()
    wl = graph_mod.import_edgelist(Path(whitelist).read_bytes(), require_acyclic=False) \
        if whitelist else ()
    return graph_mod.ArcConstraints.of(bl, wl)


data_options = [
    click.option("--data", default=None, help="input CSV file"),
    click.option("--delimiter", default="comma",
                 type=click.Choice(sorted(dataset_mod.DELIMITERS))),
    click.option("--header/--no-header", default=True),
    click.option("--factor-threshold", default=53, show_default=True,
                 help="distinct-value cutoff for factor typing"),
]


def with_options(opts):
    def deco(f):
        for opt in reversed(opts):
            f = opt(f)
        return f
    return deco


@click.group()
def main():
    """Causal graphical model workbench."""


def _config_option(f):
    return click.option("--config", default=None, help="JSON config file")(f)


@main.command()
@_config_option
@with_options(data_options)
@click.option("--method", default="hybrid",
              type=click.Choice(list(dataset_mod.DISCRETIZE_METHODS)))
@click.option("--bins", default=3, show_default=True)
@click.option("--breaks", default=3, show_default=True)
@click.option("--ibreaks", default=6, show_default=True)
@click.option("--targets", default=None, help="comma-separated numeric columns")
@click.option("--impute/--no-impute", default=False)
@click.option("--out", default=None, help="output CSV file")
@click.pass_context
def discretize(ctx, config, data, delimiter, header, factor_threshold, method,
               bins, breaks, ibreaks, targets, impute, out):
    """Discretize numeric columns and write the processed CSV."""
    _merge_config(ctx, config, "data", "out")
    p = ctx.params
    ds = _load_data(p["data"], p["delimiter"], p["header"], p["factor_threshold"])
    if p["impute"]:
        ds = dataset_mod.impute_mode(ds)
    plan = dataset_mod.DiscretizationPlan(p["method"], p["bins"], p["breaks"], p["ibreaks"])
    names = (p["targets"].split(",") if p["targets"]
             else [c.name for c in ds.columns if c.kind == "numeric"])
    ds = dataset_mod.discretize(ds, plan, names)
    Path(p["out"]).write_bytes(dataset_mod.export_csv(ds))
    click.echo(f"wrote {p['out']} ({ds.n_rows} rows)")


@main.command()
@_config_option
@with_options(data_options)
@click.option("--measure", default="cramers_v", type=click.Choice(list(assoc_mod.MEASURES)))
@click.option("--threshold", default=0.0, show_default=True)
@click.option("--communities", "linkage", default=None,
              type=click.Choice(list(assoc_mod.LINKAGES)),
              help="also detect link communities with this linkage")
@click.option("--out", default=None, help="edge-list CSV output")
@click.pass_context
def assoc(ctx, config, data, delimiter, header, factor_threshold, measure,
          threshold, linkage, out):
    """Build a pairwise association network."""
    _merge_config(ctx, config, "data")
    p = ctx.params
    ds = _load_data(p["data"], p["delimiter"], p["header"], p["factor_threshold"])
    g = assoc_mod.build_assoc(ds, measure=p["measure"], threshold=p["threshold"])
    for a, b, w in g.edges:
        click.echo(f"{a} -- {b}  {w:.4f}")
    if p["linkage"]:
        comm = assoc_mod.link_communities(g, link=p["linkage"])
        click.echo(f"partition density {comm.partition_density:.4f}")
        for (a, b), cid in sorted(comm.communities.items()):
            click.echo(f"community {cid}: {a} -- {b}")
    if p["out"]:
        Path(p["out"]).write_bytes(assoc_mod.export_edgelist(g))
        click.echo(f"wrote {p['out']}")


algo_options = [
    click.option("--algo", default="hc", type=click.Choice(list(learn_mod.ALGORITHMS))),
    click.option("--score", default="bic", type=click.Choice(["loglik", "aic", "bic", "bde", "mbde"])),
    click.option("--iss", default=1.0, show_default=True),
    click.option("--max-parents", default=None, type=int),
    click.option("--restarts", default=0, show_default=True),
    click.option("--tabu-length", default=10, show_default=True),
    click.option("--alpha", default=0.05, show_default=True),
    click.option("--seed", default=0, show_default=True),
    click.option("--blacklist", default=None, help="from,to CSV of forbidden arcs"),
    click.option("--whitelist", default=None, help="from,to CSV of forced arcs"),
    click.option("--start", "start_model", default=None, help="model JSON to initialize from"),
    click.option("--interventions", default=None,
                 help="indicator column for interventional rows (index coded)"),
]


def _search_config(p) -> learn_mod.SearchConfig:
    start = None
    if p.get("start_model"):
        start = model_io.model_dag(model_io.parse_model(Path(p["start_model"]).read_bytes()))
    return learn_mod.SearchConfig(
        algorithm=p["algo"], score=ScoreSpec(p["score"], p["iss"]),
        constraints=_read_constraints(p.get("blacklist"), p.get("whitelist")),
        start=start, max_parents=p.get("max_parents"), tabu_length=p["tabu_length"],
        restarts=p["restarts"], alpha=p["alpha"], seed=p["seed"])


def _maybe_interventions(ds, p):
    if p.get("interventions"):
        spec = dataset_mod.InterventionSpec.from_index_column(ds, p["interventions"])
        ds = dataset_mod.attach_interventions(ds, spec)
    return ds


@main.command()
@_config_option
@with_options(data_options)
@with_options(algo_options)
@click.option("--bootstrap", default=0, show_default=True,
              help="bootstrap iterations (0 = direct learning)")
@click.option("--fraction", default=1.0, show_default=True)
@click.option("--resample/--no-resample", default=True)
@click.option("--edge-thr", default=0.5, show_default=True)
@click.option("--dir-thr", default=0.5, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--out", default=None, help="model document output")
@click.pass_context
def learn(ctx, config, **_):
    """Learn a structure (optionally bootstrapped) and print the result."""
    _merge_config(ctx, config, "data")
    p = ctx.params
    ds = _maybe_interventions(
        _load_data(p["data"], p["delimiter"], p["header"], p["factor_threshold"]), p)
    cfg = _search_config(p)
    strengths = None
    bcfg = None
    if p["bootstrap"] > 0:
        bcfg = learn_mod.BootstrapConfig(
            iterations=p["bootstrap"], sample_fraction=p["fraction"],
            resample=p["resample"], edge_threshold=p["edge_thr"],
            direction_threshold=p["dir_thr"], seed=p["seed"], workers=p["workers"])
        strengths, _ = learn_mod.bootstrap_learn(ds, cfg, bcfg)
        dag = learn_mod.averaged_network(strengths, bcfg.edge_threshold,
                                         bcfg.direction_threshold)
        click.echo("pair strengths (a -- b, strength, direction a->b):")
        for (a, b), (s, d) in sorted(strengths.entries.items()):
            click.echo(f"  {a} -- {b}  {s:.3f}  {d:.3f}")
    else:
        dag = learn_mod.learn_structure(ds, cfg)
    click.echo(f"averaged network: {len(dag.arcs)} arcs")
    for a, b in dag.arcs:
        click.echo(f"  {a} -> {b}")
    if p["out"]:
        doc = model_io.model_document(dag=dag, strengths=strengths,
                                      search_config=cfg, bootstrap_config=bcfg)
        Path(p["out"]).write_bytes(model_io.dump_model(doc))
        click.echo(f"wrote {p['out']}")


@main.command()
@_config_option
@click.option("--model", "model_path", default=None)
@click.option("--edge-thr", default=0.5, show_default=True)
@click.option("--dir-thr", default=0.5, show_default=True)
@click.option("--out", default=None)
@click.pass_context
def threshold(ctx, config, model_path, edge_thr, dir_thr, out):
    """Re-threshold a saved strength table without re-learning."""
    _merge_config(ctx, config, "model_path")
    p = ctx.params
    doc = model_io.parse_model(Path(p["model_path"]).read_bytes())
    st = model_io.model_strengths(doc)
    if st is None:
        raise click.ClickException("model document has no strength table")
    dag = learn_mod.averaged_network(st, p["edge_thr"], p["dir_thr"])
    for a, b in dag.arcs:
        click.echo(f"{a} -> {b}")
    if p["out"]:
        doc["arcs"] = [list(a) for a in dag.arcs]
        doc["fitted"] = None
        Path(p["out"]).write_bytes(model_io.dump_model(doc))
        click.echo(f"wrote {p['out']}")


@main.command()
@_config_option
@with_options(data_options)
@click.option("--model", "model_path", default=None)
@click.option("--method", default="bayes", type=click.Choice(["bayes", "mle"]))
@click.option("--iss", default=1.0, show_default=True)
@click.option("--out", default=None)
@click.pass_context
def fit(ctx, config, **_):
    """Fit parameters on a fixed structure; write the fitted model document."""
    _merge_config(ctx, config, "data", "model_path", "out")
    p = ctx.params
    ds = _load_data(p["data"], p["delimiter"], p["header"], p["factor_threshold"])
    doc = model_io.parse_model(Path(p["model_path"]).read_bytes())
    dag = model_io.model_dag(doc)
    bn = inference_mod.fit(ds, dag, method=p["method"], iss=p["iss"])
    doc["fitted"] = bn.to_json()
    Path(p["out"]).write_bytes(model_io.dump_model(doc))
    click.echo(f"wrote {p['out']}")


@main.command()
@_config_option
@click.option("--model", "model_path", default=None)
@click.option("--event", default=None)
@click.option("--evidence", multiple=True, help="node=level (repeatable)")
@click.option("--method", default="auto", type=click.Choice(["auto", "exact", "approximate"]))
@click.option("--samples", default=10000, show_default=True)
@click.option("--repeats", default=30, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_context
def query(ctx, config, model_path, event, evidence, method, samples, repeats, seed):
    """Query a fitted model: P(event | evidence)."""
    _merge_config(ctx, config, "model_path", "event")
    p = ctx.params
    doc = model_io.parse_model(Path(p["model_path"]).read_bytes())
    bn = model_io.model_fitted(doc)
    if bn is None:
        raise click.ClickException("model document has no fitted parameters; run fit")
    ev = {}
    for item in p["evidence"]:
        node, _, level = item.partition("=")
        if not level:
            raise click.UsageError(f"evidence must be node=level, got {item!r}")
        ev[node] = level
    res = inference_mod.query(bn, inference_mod.Query(p["event"], ev),
                              method=p["method"], samples_per_repeat=p["samples"],
                              repeats=p["repeats"], seed=p["seed"])
    click.echo(f"P({p['event']} | {ev or 'no evidence'}) by {res.method}:")
    for lv, prob in res.distribution.items():
        bar = f"  {lv}: {prob:.4f}"
        if res.error_bars:
            bar += f" +- {res.error_bars[lv]:.4f}"
        click.echo(bar)


@main.command()
@_config_option
@with_options(data_options)
@with_options(algo_options)
@click.option("--mode", default="kfold", type=click.Choice(["kfold", "holdout"]))
@click.option("--k", default=10, show_default=True)
@click.option("--fraction", default=0.2, show_default=True)
@click.pass_context
def validate(ctx, config, **_):
    """Cross-validate a learning configuration."""
    _merge_config(ctx, config, "data")
    p = ctx.params
    ds = _maybe_interventions(
        _load_data(p["data"], p["delimiter"], p["header"], p["factor_threshold"]), p)
    cfg = _search_config(p)
    report = learn_mod.validate(ds, cfg, mode=p["mode"], k=p["k"], fraction=p["fraction"])
    click.echo(f"mean log-likelihood loss: {report.mean_loss:.4f}")
    click.echo(f"held-out network score:   {report.heldout_score:.4f}")
    for v, loss in sorted(report.per_variable_loss.items()):
        click.echo(f"  {v}: {loss:.4f}")


@main.command()
@_config_option
@click.option("--model", "model_path", default=None)
@click.option("--utility", default=None)
@click.option("--payoff", multiple=True, help="level=value (repeatable)")
@click.option("--decisions", default=None, help="comma-separated decision variables")
@click.option("--mc-samples", default=100000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, help="policy CSV output")
@click.pass_context
def policy(ctx, config, model_path, utility, payoff, decisions, mc_samples, seed, out):
    """Learn the expected-payoff policy table for a set of decision variables."""
    _merge_config(ctx, config, "model_path", "utility", "decisions")
    p = ctx.params
    doc = model_io.parse_model(Path(p["model_path"]).read_bytes())
    bn = model_io.model_fitted(doc)
    if bn is None:
        raise click.ClickException("model document has no fitted parameters; run fit")
    payoffs = {}
    for item in p["payoff"]:
        level, _, value = item.partition("=")
        payoffs[level] = float(value)
    diagram = decision_mod.build_diagram(bn, p["utility"], payoffs,
                                         p["decisions"].split(","))
    table = decision_mod.learn_policy(diagram, mc_samples=p["mc_samples"], seed=p["seed"])
    header = "  ".join(table.decision_vars) + "  payoff"
    click.echo(header)
    for levels, value in table.rows:
        click.echo("  ".join(levels) + f"  {value:.4f}")
    if p["out"]:
        Path(p["out"]).write_bytes(decision_mod.export_policy_csv(table))
        click.echo(f"wrote {p['out']}")


@main.command()
@_config_option
@click.option("--model", "model_path", default=None)
@click.option("--name", default="dashboard", show_default=True)
@click.option("--assets", default=None, help="directory of extra UI assets to embed")
@click.option("--out", default=None, help="bundle zip output")
@click.pass_context
def publish(ctx, config, model_path, name, assets, out):
    """Export a standalone dashboard bundle from a fitted model document."""
    from .dashboard import export_dashboard

    _merge_config(ctx, config, "model_path", "out")
    p = ctx.params
    doc = model_io.parse_model(Path(p["model_path"]).read_bytes())
    session = Session(id="cli")
    session.dag = model_io.model_dag(doc)
    session.strengths = model_io.model_strengths(doc)
    session.fitted = model_io.model_fitted(doc)
    bundle = export_dashboard(session, name=p["name"], assets_dir=p["assets"])
    Path(p["out"]).write_bytes(bundle)
    click.echo(f"wrote {p['out']} ({len(bundle)} bytes)")


@main.command()
@_config_option
@click.option("--addr", default=None, help="host:port (default env CBENCH_ADDR or 127.0.0.1:8350)")
@click.option("--workers", default=1, show_default=True, help="uvicorn worker processes")
@click.option("--data-dir", default=None, help="session storage (default env CBENCH_DATA_DIR)")
@click.option("--ui-dir", default=None,
              help="serve a built web client from this directory (env CBENCH_UI_DIR)")
@click.pass_context
def serve(ctx, config, addr, workers, data_dir, ui_dir):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    _merge_config(ctx, config)
    p = ctx.params
    addr = p["addr"] or os.environ.get("CBENCH_ADDR", "127.0.0.1:8350")
    data_dir = p["data_dir"] or os.environ.get("CBENCH_DATA_DIR", "./cbench-data")
    ui_dir = p["ui_dir"] or os.environ.get("CBENCH_UI_DIR")
    host, _, port = addr.partition(":")
    app = create_app(data_dir, ui_dir=ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8350),
                workers=None if p["workers"] <= 1 else p["workers"])


def run():
    try:
        main(standalone_mode=True)
    except CbenchError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    run()
