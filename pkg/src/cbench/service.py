"""Session-oriented HTTP service exposing the full pipeline under /api/v1.

Structure learning runs as cancellable background jobs (bootstraps can take
minutes) polled via /jobs/{id}; every other operation is synchronous. Domain
errors map to structured {code, message, detail} client errors. Per-session
state is guarded by an exclusive lock, so concurrent requests to distinct
sessions never interleave.
"""

from __future__ import annotations

import io
import secrets
import threading
from dataclasses import dataclass, field, replace

from fastapi import Body, FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse, Response

from . import assoc as assoc_mod
from . import dashboard as dashboard_mod
from . import dataset as dataset_mod
from . import decision as decision_mod
from . import graph as graph_mod
from . import inference as inference_mod
from . import learn as learn_mod
from . import model_io
from .errors import CbenchError, CycleError, EvidenceError, ModelFormatError
from .sessions import SessionStore

API = "/api/v1"


@dataclass
class Job:
    id: str
    session_id: str
    status: str = "running"  # running | done | failed | cancelled
    done: int = 0
    total: int = 0
    error: str | None = None
    cancel: threading.Event = field(default_factory=threading.Event)
    thread: threading.Thread | None = None


class ServiceState:
    def __init__(self, data_dir):
        self.store = SessionStore(data_dir)
        self.sessions: dict = {}
        self.locks: dict[str, threading.RLock] = {}
        self.jobs: dict[str, Job] = {}
        self.registry_lock = threading.Lock()

    def lock(self, sid: str) -> threading.RLock:
        with self.registry_lock:
            if sid not in self.locks:
                self.locks[sid] = threading.RLock()
            return self.locks[sid]

    def get(self, sid: str):
        with self.registry_lock:
            if sid in self.sessions:
                return self.sessions[sid]
        session = self.store.restore(sid)  # raises FileNotFoundError
        with self.registry_lock:
            self.sessions.setdefault(sid, session)
            return self.sessions[sid]


def _session_summary(s) -> dict:
    return {
        "id": s.id,
        "dataset": None if s.dataset is None else {
            "name": s.dataset.name, "n_rows": s.dataset.n_rows,
            "columns": [{"name": c.name, "kind": c.kind, "levels": list(c.levels)}
                        for c in s.dataset.columns],
            "indicator_columns": sorted(s.dataset.indicator_columns)},
        "assoc": None if s.assoc is None else {
            "measure": s.assoc.measure, "n_edges": len(s.assoc.edges)},
        "dag": None if s.dag is None else s.dag.to_json(),
        "strengths": None if s.strengths is None else s.strengths.to_json(),
        "fitted": s.fitted is not None,
        "diagram": s.diagram,
        "history": s.history,
    }


def create_app(data_dir, ui_dir=None) -> FastAPI:
    """Build the service; when ui_dir points at a built web client, it is
    served from the root so the UI and API share an origin."""
    app = FastAPI(title="cbench", docs_url=None, redoc_url=None)
    state = ServiceState(data_dir)
    app.state.service = state

    @app.exception_handler(CbenchError)
    def _domain_error(request: Request, exc: CbenchError):
        detail: dict = {}
        if isinstance(exc, CycleError):
            detail["cycle"] = exc.cycle
        status = 404 if isinstance(exc, ModelFormatError) and "no session" in str(exc) else 400
        if isinstance(exc, EvidenceError):
            status = 422
        return JSONResponse(status_code=status, content={
            "code": exc.code, "message": str(exc), "detail": detail})

    @app.exception_handler(FileNotFoundError)
    def _not_found(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=404, content={
            "code": "not_found", "message": str(exc), "detail": {}})

    def mutate(sid: str, fn, event: str, detail: dict | None = None):
        session = state.get(sid)
        with state.lock(sid):
            result = fn(session)
            session.record(event, detail)
            state.store.persist(session)
        return result

    # -- sessions ---------------------------------------------------------

    @app.post(API + "/sessions")
    def create_session():
        session = state.store.create()
        with state.registry_lock:
            state.sessions[session.id] = session
        return {"id": session.id}

    @app.get(API + "/sessions/{sid}")
    def get_session(sid: str):
        return _session_summary(state.get(sid))

    # -- dataset ----------------------------------------------------------

    @app.post(API + "/sessions/{sid}/dataset")
    def upload_dataset(sid: str, file: UploadFile = File(...),
                       delimiter: str = Form("comma"), header: bool = Form(True),
                       factor_level_threshold: int = Form(53)):
        payload = file.file.read()

        def fn(session):
            session.dataset = dataset_mod.load_csv(
                payload, delimiter=delimiter, header=header,
                factor_level_threshold=factor_level_threshold,
                name=file.filename or "dataset")
            session.assoc = None
            session.communities = None
            return {"n_rows": session.dataset.n_rows,
                    "columns": [{"name": c.name, "kind": c.kind,
                                 "n_levels": len(c.levels)}
                                for c in session.dataset.columns]}
        return mutate(sid, fn, "dataset.upload",
                      {"delimiter": delimiter, "header": header})

    @app.post(API + "/sessions/{sid}/preprocess")
    def preprocess(sid: str, body: dict = Body(...)):
        action = body.get("action")

        def fn(session):
            ds = _require(session.dataset, "upload a dataset first")
            if action == "coerce":
                session.dataset = dataset_mod.coerce_type(ds, body["column"], body["to"])
            elif action == "impute":
                session.dataset = dataset_mod.impute_mode(ds)
            elif action == "discretize":
                plan = dataset_mod.DiscretizationPlan(
                    method=body.get("method", "hybrid"),
                    bins=int(body.get("bins", 3)),
                    hartemink_breaks=int(body.get("breaks", 3)),
                    hartemink_ibreaks=int(body.get("ibreaks", 6)))
                targets = body.get("targets") or [
                    c.name for c in ds.columns if c.kind == "numeric"]
                session.dataset = dataset_mod.discretize(ds, plan, targets)
            elif action == "interventions":
                if body.get("index"):
                    spec = dataset_mod.InterventionSpec.from_index_column(
                        ds, body["column"])
                else:
                    spec = dataset_mod.InterventionSpec(
                        body["column"],
                        {lv: tuple(vs) for lv, vs in body["mapping"].items()})
                session.dataset = dataset_mod.attach_interventions(ds, spec)
            elif action == "drop":
                session.dataset = ds.drop_column(body["column"])
            else:
                raise ModelFormatError(f"unknown preprocess action {action!r}")
            return {"columns": [{"name": c.name, "kind": c.kind}
                                for c in session.dataset.columns]}
        return mutate(sid, fn, f"preprocess.{action}", body)

    @app.get(API + "/sessions/{sid}/summary/{column}")
    def column_summary(sid: str, column: str):
        session = state.get(sid)
        ds = _require(session.dataset, "upload a dataset first")
        return {"column": column, "counts": dataset_mod.summarize(ds, column)}

    # -- association network ------------------------------------------------

    @app.post(API + "/sessions/{sid}/assoc")
    def build_assoc(sid: str, body: dict = Body(...)):
        def fn(session):
            ds = _require(session.dataset, "upload a dataset first")
            session.assoc = assoc_mod.build_assoc(
                ds, measure=body.get("measure", "cramers_v"),
                threshold=float(body.get("threshold", 0.0)),
                workers=int(body.get("workers", 1)))
            session.communities = None
            return {"nodes": list(session.assoc.nodes),
                    "edges": [[a, b, w] for a, b, w in session.assoc.edges]}
        return mutate(sid, fn, "assoc.build", body)

    @app.post(API + "/sessions/{sid}/assoc/communities")
    def communities(sid: str, body: dict = Body(default={})):
        def fn(session):
            g = _require(session.assoc, "build the association network first")
            session.communities = assoc_mod.link_communities(
                g, link=body.get("linkage", "ward"))
            return {"partition_density": session.communities.partition_density,
                    "communities": [[a, b, cid] for (a, b), cid in
                                    sorted(session.communities.communities.items())]}
        return mutate(sid, fn, "assoc.communities", body)

    # -- structure learning ---------------------------------------------------

    @app.post(API + "/sessions/{sid}/structure/learn")
    def learn(sid: str, body: dict = Body(...)):
        session = state.get(sid)
        ds = _require(session.dataset, "upload a dataset first")
        cfg = learn_mod.SearchConfig.from_json(body.get("search", {}))
        bcfg = (learn_mod.BootstrapConfig.from_json(body["bootstrap"])
                if body.get("bootstrap") else None)
        job = Job(id=secrets.token_hex(8), session_id=sid,
                  total=bcfg.iterations if bcfg else 1)

        def run():
            try:
                if bcfg is not None:
                    def progress(done, total):
                        job.done, job.total = done, total
                        return not job.cancel.is_set()
                    strengths, _ = learn_mod.bootstrap_learn(ds, cfg, bcfg,
                                                             progress=progress)
                    dag = learn_mod.averaged_network(
                        strengths, bcfg.edge_threshold, bcfg.direction_threshold)
                else:
                    if job.cancel.is_set():
                        raise InterruptedError("cancelled")
                    dag = learn_mod.learn_structure(ds, cfg)
                    strengths = None
                    job.done = 1
                with state.lock(sid):
                    session.dag = dag
                    session.strengths = strengths
                    session.search_config = cfg
                    session.bootstrap_config = bcfg
                    session.fitted = None
                    session.record("structure.learn", body)
                    state.store.persist(session)
                job.status = "done"
            except InterruptedError:
                job.status = "cancelled"
            except Exception as e:  # surfaced via the job, not a 500
                job.status = "failed"
                job.error = str(e)

        job.thread = threading.Thread(target=run, daemon=True)
        with state.registry_lock:
            state.jobs[job.id] = job
        job.thread.start()
        return {"job": job.id}

    @app.get(API + "/sessions/{sid}/jobs/{jid}")
    def job_status(sid: str, jid: str):
        job = state.jobs.get(jid)
        if job is None or job.session_id != sid:
            raise FileNotFoundError(f"no job {jid!r}")
        out = {"job": jid, "status": job.status, "done": job.done, "total": job.total}
        if job.error:
            out["error"] = job.error
        if job.status == "done":
            session = state.get(sid)
            out["dag"] = session.dag.to_json()
            out["strengths"] = (session.strengths.to_json()
                                if session.strengths else None)
        return out

    @app.delete(API + "/sessions/{sid}/jobs/{jid}")
    def cancel_job(sid: str, jid: str):
        job = state.jobs.get(jid)
        if job is None or job.session_id != sid:
            raise FileNotFoundError(f"no job {jid!r}")
        job.cancel.set()
        return {"job": jid, "status": job.status, "cancelling": True}

    @app.post(API + "/sessions/{sid}/structure/threshold")
    def rethreshold(sid: str, body: dict = Body(...)):
        def fn(session):
            st = _require(session.strengths, "no strength table: run bootstrap learning")
            session.dag = learn_mod.averaged_network(
                st, float(body.get("edge_threshold", 0.5)),
                float(body.get("direction_threshold", 0.5)))
            session.fitted = None
            return {"dag": session.dag.to_json()}
        return mutate(sid, fn, "structure.threshold", body)

    @app.post(API + "/sessions/{sid}/structure/edit")
    def edit(sid: str, body: dict = Body(...)):
        op = body.get("op")
        a, b = body.get("from"), body.get("to")

        def fn(session):
            dag = _require(session.dag, "no structure to edit")
            if op == "add":
                session.dag = dag.add_arc(a, b)
            elif op == "remove":
                session.dag = dag.remove_arc(a, b)
            elif op == "reverse":
                session.dag = dag.reverse_arc(a, b)
            else:
                raise ModelFormatError(f"unknown edit op {op!r}")
            session.fitted = None
            return {"dag": session.dag.to_json()}
        return mutate(sid, fn, "structure.edit", body)

    @app.post(API + "/sessions/{sid}/structure/import")
    def import_structure(sid: str, body: dict = Body(...)):
        def fn(session):
            nodes = body.get("nodes")
            if nodes is None and session.dataset is not None:
                nodes = session.dataset.learning_variables()
            session.dag = graph_mod.import_edgelist(body["csv"], nodes=nodes)
            session.strengths = None
            session.fitted = None
            return {"dag": session.dag.to_json()}
        return mutate(sid, fn, "structure.import", {})

    @app.post(API + "/sessions/{sid}/validate")
    def validate(sid: str, body: dict = Body(default={})):
        session = state.get(sid)
        ds = _require(session.dataset, "upload a dataset first")
        cfg = (learn_mod.SearchConfig.from_json(body["search"])
               if body.get("search") else session.search_config
               or learn_mod.SearchConfig())
        report = learn_mod.validate(
            ds, cfg, mode=body.get("mode", "kfold"),
            k=int(body.get("k", 10)), fraction=float(body.get("fraction", 0.2)))
        return report.to_json()

    # -- parameters and queries -------------------------------------------------

    @app.post(API + "/sessions/{sid}/fit")
    def fit_params(sid: str, body: dict = Body(default={})):
        def fn(session):
            ds = _require(session.dataset, "upload a dataset first")
            dag = _require(session.dag, "learn or import a structure first")
            session.fitted = inference_mod.fit(
                ds, dag, method=body.get("method", "bayes"),
                iss=float(body.get("iss", 1.0)))
            return {"fitted": True, "method": session.fitted.fit_method}
        return mutate(sid, fn, "fit", body)

    @app.post(API + "/sessions/{sid}/query")
    def run_query(sid: str, body: dict = Body(...)):
        session = state.get(sid)
        bn = _require(session.fitted, "fit parameters first")
        q = inference_mod.Query(body["event"], dict(body.get("evidence", {})))
        res = inference_mod.query(
            bn, q, method=body.get("method", "auto"),
            samples_per_repeat=int(body.get("samples_per_repeat", 10000)),
            repeats=int(body.get("repeats", 30)), seed=int(body.get("seed", 0)))
        return res.to_json()

    # -- decisions ---------------------------------------------------------------

    @app.post(API + "/sessions/{sid}/decision")
    def build_decision(sid: str, body: dict = Body(...)):
        def fn(session):
            bn = _require(session.fitted, "fit parameters first")
            diagram = decision_mod.build_diagram(
                bn, body["utility_var"],
                {lv: float(u) for lv, u in body["payoffs"].items()},
                body["decision_vars"])
            session.diagram = diagram.to_json()
            session.policy = None
            return session.diagram
        return mutate(sid, fn, "decision.build", body)

    @app.post(API + "/sessions/{sid}/decision/policy")
    def policy(sid: str, body: dict = Body(default={})):
        def fn(session):
            bn = _require(session.fitted, "fit parameters first")
            spec = _require(session.diagram, "build the decision network first")
            diagram = decision_mod.build_diagram(
                bn, spec["utility_var"], spec["payoffs"], spec["decision_vars"])
            session.policy = decision_mod.learn_policy(
                diagram, mc_samples=int(body.get("mc_samples", 100000)),
                seed=int(body.get("seed", 0)), method=body.get("method", "auto"))
            return session.policy.to_json()
        return mutate(sid, fn, "decision.policy", body)

    # -- exports -------------------------------------------------------------------

    @app.get(API + "/sessions/{sid}/export/{artifact}")
    def export(sid: str, artifact: str):
        session = state.get(sid)
        if artifact == "dataset":
            ds = _require(session.dataset, "no dataset")
            return Response(dataset_mod.export_csv(ds), media_type="text/csv")
        if artifact == "edgelist":
            if session.assoc is not None:
                return Response(assoc_mod.export_edgelist(session.assoc),
                                media_type="text/csv")
            dag = _require(session.dag, "no graph to export")
            return Response(graph_mod.export_edgelist(dag), media_type="text/csv")
        if artifact == "cpt":
            bn = _require(session.fitted, "fit parameters first")
            return Response(inference_mod.export_cpts_csv(bn), media_type="text/csv")
        if artifact == "policy":
            pt = _require(session.policy, "no policy table")
            return Response(decision_mod.export_policy_csv(pt), media_type="text/csv")
        if artifact == "model":
            _require(session.dag, "no model")
            return Response(model_io.dump_model(session.model_document()),
                            media_type="application/json")
        raise FileNotFoundError(f"unknown export {artifact!r}")

    @app.post(API + "/sessions/{sid}/publish")
    def publish(sid: str, body: dict = Body(default={})):
        session = state.get(sid)
        with state.lock(sid):
            bundle = dashboard_mod.export_dashboard(
                session, name=body.get("name", "dashboard"),
                assets_dir=body.get("assets_dir"))
            session.record("publish", {"name": body.get("name", "dashboard")})
            state.store.persist(session)
        return Response(bundle, media_type="application/zip", headers={
            "Content-Disposition": "attachment; filename=dashboard.zip"})

    if ui_dir is not None:
        from pathlib import Path

        from fastapi.staticfiles import StaticFiles

        if Path(ui_dir).is_dir():
            app.mount("/", StaticFiles(directory=str(ui_dir), html=True),
                      name="ui")

    return app


def _require(value, message: str):
    if value is None:
        raise ModelFormatError(message)
    return value
