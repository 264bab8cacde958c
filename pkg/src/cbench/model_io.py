"""Versioned model documents: the save/load format for learned networks.

A model document is a single JSON object carrying the node list, arc list,
optional strength table, the configs and seeds that produced it, and the
optional fitted parameters. It is deterministic for fixed seeds (no
timestamps), so CLI and HTTP pipelines can be compared byte for byte.
"""

from __future__ import annotations

import json

from .errors import ModelFormatError
from .graph import Dag
from .inference import FittedBn
from .learn import BootstrapConfig, SearchConfig, StrengthTable

FORMAT = "cbench-model"
VERSION = 1


def model_document(dag: Dag | None = None, strengths: StrengthTable | None = None,
                   search_config: SearchConfig | None = None,
                   bootstrap_config: BootstrapConfig | None = None,
                   fitted: FittedBn | None = None) -> dict:
    if dag is None and fitted is not None:
        dag = fitted.dag
    if dag is None:
        raise ModelFormatError("model document needs at least a dag")
    return {
        "format": FORMAT,
        "version": VERSION,
        "nodes": list(dag.nodes),
        "arcs": [list(a) for a in dag.arcs],
        "strengths": strengths.to_json() if strengths else None,
        "search_config": search_config.to_json() if search_config else None,
        "bootstrap_config": bootstrap_config.to_json() if bootstrap_config else None,
        "seeds": {
            "search": search_config.seed if search_config else None,
            "bootstrap": bootstrap_config.seed if bootstrap_config else None,
        },
        "fitted": fitted.to_json() if fitted else None,
    }


def dump_model(doc: dict) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def parse_model(data: bytes | str | dict) -> dict:
    if isinstance(data, dict):
        doc = data
    else:
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ModelFormatError(f"model document is not valid JSON: {e}")
    if doc.get("format") != FORMAT:
        raise ModelFormatError(f"not a {FORMAT} document")
    if doc.get("version") != VERSION:
        raise ModelFormatError(
            f"model document version {doc.get('version')} needs migration to {VERSION}")
    return doc


def model_dag(doc: dict) -> Dag:
    return Dag(tuple(doc["nodes"]), tuple((a, b) for a, b in doc["arcs"]))


def model_strengths(doc: dict) -> StrengthTable | None:
    raw = doc.get("strengths")
    return StrengthTable.from_json(raw) if raw else None


def model_fitted(doc: dict) -> FittedBn | None:
    raw = doc.get("fitted")
    return FittedBn.from_json(raw) if raw else None
