"""On-disk sessions: one directory per session, versioned JSON documents.

A session accumulates the pipeline artifacts (dataset, association graph,
strength table, network, fitted parameters, diagram, policy) plus an
append-only history of the operations applied. Restore reproduces the exact
artifacts, so identical seeds give identical query answers after a reload.
"""

from __future__ import annotations

import json
import secrets
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .assoc import AssocGraph, CommunityAssignment
from .dataset import Column, Dataset
from .decision import PolicyTable
from .errors import ModelFormatError
from .graph import Dag
from .inference import FittedBn
from .learn import BootstrapConfig, SearchConfig, StrengthTable
from . import model_io

SESSION_FORMAT = "cbench-session"
SESSION_VERSION = 1


def dataset_to_json(ds: Dataset) -> dict:
    cols = []
    for c in ds.columns:
        if c.kind == "factor":
            cols.append({"name": c.name, "kind": "factor", "levels": list(c.levels),
                         "values": c.values.tolist()})
        else:
            vals = [None if np.isnan(v) else float(v) for v in c.values]
            cols.append({"name": c.name, "kind": "numeric", "values": vals})
    return {"name": ds.name, "columns": cols,
            "interventions": {v: np.flatnonzero(m).tolist()
                              for v, m in ds.interventions.items()},
            "indicator_columns": sorted(ds.indicator_columns)}


def dataset_from_json(doc: dict) -> Dataset:
    cols = []
    for c in doc["columns"]:
        if c["kind"] == "factor":
            cols.append(Column(c["name"], "factor",
                               np.asarray(c["values"], dtype=np.int64),
                               tuple(c["levels"])))
        else:
            vals = np.array([np.nan if v is None else float(v) for v in c["values"]])
            cols.append(Column(c["name"], "numeric", vals))
    n = len(cols[0].values) if cols else 0
    interventions = {}
    for v, idx in doc.get("interventions", {}).items():
        mask = np.zeros(n, dtype=bool)
        mask[np.asarray(idx, dtype=np.int64)] = True
        interventions[v] = mask
    return Dataset(doc.get("name", "dataset"), tuple(cols), interventions,
                   frozenset(doc.get("indicator_columns", ())))


@dataclass
class Session:
    id: str
    dataset: Dataset | None = None
    assoc: AssocGraph | None = None
    communities: CommunityAssignment | None = None
    dag: Dag | None = None
    strengths: StrengthTable | None = None
    search_config: SearchConfig | None = None
    bootstrap_config: BootstrapConfig | None = None
    fitted: FittedBn | None = None
    diagram: dict | None = None  # utility_var, payoffs, decision_vars
    policy: PolicyTable | None = None
    history: list = field(default_factory=list)

    def record(self, event: str, detail: dict | None = None):
        self.history.append({"event": event, "detail": detail or {}})

    def model_document(self) -> dict:
        return model_io.model_document(
            dag=self.dag, strengths=self.strengths,
            search_config=self.search_config, bootstrap_config=self.bootstrap_config,
            fitted=self.fitted)


class SessionStore:
    """Directory-backed store; documents are plain JSON for inspectability."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def create(self) -> Session:
        sid = secrets.token_hex(8)
        session = Session(id=sid)
        self.persist(session)
        return session

    def path(self, sid: str) -> Path:
        return self.root / sid

    def exists(self, sid: str) -> bool:
        return (self.path(sid) / "session.json").is_file()

    def persist(self, s: Session) -> None:
        d = self.path(s.id)
        d.mkdir(parents=True, exist_ok=True)
        manifest = {"format": SESSION_FORMAT, "version": SESSION_VERSION, "id": s.id}
        _write_json(d / "session.json", manifest)
        if s.dataset is not None:
            _write_json(d / "dataset.json", dataset_to_json(s.dataset))
        if s.assoc is not None:
            _write_json(d / "assoc.json", {
                "nodes": list(s.assoc.nodes), "measure": s.assoc.measure,
                "edges": [[a, b, w] for a, b, w in s.assoc.edges],
                "communities": None if s.communities is None else {
                    "partition_density": s.communities.partition_density,
                    "edges": [[a, b, cid] for (a, b), cid in
                              sorted(s.communities.communities.items())]}})
        if s.dag is not None or s.fitted is not None:
            _write_json(d / "model.json", s.model_document())
        if s.diagram is not None:
            _write_json(d / "diagram.json", s.diagram)
        if s.policy is not None:
            _write_json(d / "policy.json", s.policy.to_json())
        with open(d / "history.jsonl", "w", encoding="utf-8") as fh:
            for item in s.history:
                fh.write(json.dumps(item, sort_keys=True) + "\n")

    def restore(self, sid: str) -> Session:
        d = self.path(sid)
        manifest_path = d / "session.json"
        if not manifest_path.is_file():
            raise FileNotFoundError(f"no session {sid!r}")
        manifest = json.loads(manifest_path.read_text())
        if manifest.get("format") != SESSION_FORMAT:
            raise ModelFormatError("not a session directory")
        if manifest.get("version") != SESSION_VERSION:
            raise ModelFormatError(
                f"session version {manifest.get('version')} needs migration "
                f"to {SESSION_VERSION}")
        s = Session(id=sid)
        if (d / "dataset.json").is_file():
            s.dataset = dataset_from_json(json.loads((d / "dataset.json").read_text()))
        if (d / "assoc.json").is_file():
            doc = json.loads((d / "assoc.json").read_text())
            s.assoc = AssocGraph(tuple(doc["nodes"]),
                                 tuple((a, b, float(w)) for a, b, w in doc["edges"]),
                                 doc.get("measure", "cramers_v"))
            if doc.get("communities"):
                comm = doc["communities"]
                s.communities = CommunityAssignment(
                    {(a, b): int(cid) for a, b, cid in comm["edges"]},
                    float(comm["partition_density"]))
        if (d / "model.json").is_file():
            doc = model_io.parse_model((d / "model.json").read_bytes())
            s.dag = model_io.model_dag(doc)
            s.strengths = model_io.model_strengths(doc)
            s.fitted = model_io.model_fitted(doc)
            if doc.get("search_config"):
                s.search_config = SearchConfig.from_json(doc["search_config"])
            if doc.get("bootstrap_config"):
                s.bootstrap_config = BootstrapConfig.from_json(doc["bootstrap_config"])
        if (d / "diagram.json").is_file():
            s.diagram = json.loads((d / "diagram.json").read_text())
        if (d / "policy.json").is_file():
            doc = json.loads((d / "policy.json").read_text())
            dvars = tuple(doc["decision_vars"])
            rows = tuple((tuple(r["assignment"][v] for v in dvars), float(r["payoff"]))
                         for r in doc["rows"])
            s.policy = PolicyTable(dvars, rows)
        if (d / "history.jsonl").is_file():
            with open(d / "history.jsonl", encoding="utf-8") as fh:
                s.history = [json.loads(line) for line in fh if line.strip()]
        return s

    def ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if (p / "session.json").is_file())


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
