"""Static dashboard bundles: a self-contained archive of the learned model.

The archive carries the model document, strength table, precomputed
marginals, a manifest and static viewer assets. The viewer page embeds the
model inline so the bundle opens from disk with no server and no access to
the original dataset; richer clients can read the individual JSON files.
"""

from __future__ import annotations

import io
import json
import zipfile
from importlib import resources
from pathlib import Path

from .errors import ModelFormatError
from .inference import Query, query
from . import model_io

BUNDLE_FORMAT = "cbench-dashboard"
BUNDLE_VERSION = 1


def precompute_marginals(fitted, seed: int = 0) -> dict:
    out = {}
    for v in fitted.dag.nodes:
        res = query(fitted, Query(v), seed=seed)
        out[v] = res.distribution
    return out


def export_dashboard(session, name: str = "dashboard",
                     assets_dir: str | Path | None = None) -> bytes:
    """Zip the session's fitted model into a standalone dashboard bundle."""
    if session.fitted is None:
        raise ModelFormatError("fit before publishing: the session has no fitted network")
    model_doc = session.model_document()
    marginals = precompute_marginals(session.fitted)
    manifest = {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "name": name,
        "readonly": True,
        "nodes": list(session.fitted.dag.nodes),
        "files": {"model": "model.json", "marginals": "marginals.json"},
    }
    viewer = _render_viewer(name, model_doc, marginals)
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("manifest.json", json.dumps(manifest, indent=2, sort_keys=True))
        zf.writestr("model.json", model_io.dump_model(model_doc))
        zf.writestr("marginals.json", json.dumps(marginals, indent=2, sort_keys=True))
        zf.writestr("index.html", viewer)
        if assets_dir is not None:
            root = Path(assets_dir)
            for p in sorted(root.rglob("*")):
                if p.is_file():
                    zf.writestr(f"assets/{p.relative_to(root)}", p.read_bytes())
    return buf.getvalue()


def _render_viewer(name: str, model_doc: dict, marginals: dict) -> str:
    template = resources.files("cbench").joinpath("assets/dashboard/index.html").read_text()
    return (template
            .replace("__TITLE__", json.dumps(name)[1:-1])
            .replace("__MODEL_JSON__", json.dumps(model_doc))
            .replace("__MARGINALS_JSON__", json.dumps(marginals)))
