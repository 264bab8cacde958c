"""Reference networks: ALARM, a Sachs-style signalling network, and Asia.

These play the role of the preloaded example datasets: fully parameterized
fitted networks that scripts and tests can sample from. ALARM follows the
published monitoring-network structure (37 nodes, 46 arcs) and its standard
conditional probability tables; the Sachs network uses the published
consensus arcs over the 11 phosphoprotein variables with synthetic strong
monotone CPTs, plus a generator for interventional samples mimicking the
classic 5,400-row assay layout.
"""

from __future__ import annotations

import itertools

import numpy as np

from .dataset import Column, Dataset, InterventionSpec, attach_interventions
from .graph import Dag
from .inference import Cpt, FittedBn, sample

TF = ("TRUE", "FALSE")
LNH = ("LOW", "NORMAL", "HIGH")
ZLNH = ("ZERO", "LOW", "NORMAL", "HIGH")


def _bn_from_spec(spec: dict[str, tuple]) -> FittedBn:
    """spec: node -> (levels, parents, rows) with rows keyed by parent-level
    tuples (parents in sorted order, matching Dag.parents)."""
    nodes = tuple(spec)
    arcs = []
    for v, (_, parents, _) in spec.items():
        for p in parents:
            arcs.append((p, v))
    dag = Dag(nodes, tuple(sorted(arcs)))
    cpts = {}
    for v, (levels, parents, rows) in spec.items():
        parents = tuple(sorted(parents))
        plevels = tuple(tuple(spec[p][0]) for p in parents)
        table = []
        if parents:
            for combo in itertools.product(*plevels):
                table.append(rows[combo])
        else:
            table.append(rows)
        arr = np.asarray(table, dtype=float)
        arr = arr / arr.sum(axis=1, keepdims=True)
        cpts[v] = Cpt(v, parents, tuple(levels), plevels, arr)
    return FittedBn(dag, cpts)


# -- ALARM ------------------------------------------------------------------------

def _identity4(peak: int, strength: float = 0.97):
    row = [(1.0 - strength) / 3.0] * 4
    row[peak] = strength
    return tuple(row)


def _catechol_rows():
    """P(CATECHOL = HIGH) rises with hypercapnia, light anesthesia, hypoxemia
    and low peripheral resistance."""
    rows = {}
    for artco2 in LNH:
        for insuff in TF:
            for sao2 in LNH:
                for tpr in LNH:
                    p = 0.01
                    p += {"LOW": 0.10, "NORMAL": 0.0, "HIGH": 0.35}[artco2]
                    p += 0.30 if insuff == "TRUE" else 0.0
                    p += {"LOW": 0.40, "NORMAL": 0.0, "HIGH": 0.0}[sao2]
                    p += {"LOW": 0.35, "NORMAL": 0.0, "HIGH": 0.05}[tpr]
                    p = min(p, 0.99)
                    rows[(artco2, insuff, sao2, tpr)] = (1.0 - p, p)
    return rows


def _press_rows():
    """Airway pressure tracks tube flow, raised by kinks, damped by a
    misplaced tube."""
    rows = {}
    for intub in ("NORMAL", "ESOPHAGEAL", "ONESIDED"):
        for kink in TF:
            for vt, vent in enumerate(ZLNH):
                if vent == "ZERO":
                    rows[(intub, kink, vent)] = _identity4(0)
                    continue
                level = vt
                if intub == "ESOPHAGEAL":
                    level = max(1, level - 1)
                if kink == "TRUE":
                    level = min(3, level + 1)
                rows[(intub, kink, vent)] = _identity4(level, 0.9)
    return rows


def _ventlung_rows():
    rows = {}
    for intub in ("NORMAL", "ESOPHAGEAL", "ONESIDED"):
        for kink in TF:
            for vt, vent in enumerate(ZLNH):
                if intub == "ESOPHAGEAL":
                    rows[(intub, kink, vent)] = _identity4(0)
                elif kink == "TRUE" and vt > 0:
                    rows[(intub, kink, vent)] = _identity4(max(1, vt - 1), 0.85)
                else:
                    rows[(intub, kink, vent)] = _identity4(vt)
    return rows


def _ventalv_rows():
    rows = {}
    for intub in ("NORMAL", "ESOPHAGEAL", "ONESIDED"):
        for vt, vent in enumerate(ZLNH):
            if intub == "ESOPHAGEAL":
                rows[(intub, vent)] = _identity4(0)
            elif intub == "ONESIDED":
                rows[(intub, vent)] = _identity4(max(0, vt - 1), 0.9)
            else:
                rows[(intub, vent)] = _identity4(vt)
    return rows


def _minvol_rows():
    rows = {}
    for intub in ("NORMAL", "ESOPHAGEAL", "ONESIDED"):
        for vt, vent in enumerate(ZLNH):
            if intub == "ESOPHAGEAL":
                rows[(intub, vent)] = (0.6, 0.38, 0.01, 0.01) if vt else _identity4(0)
            else:
                rows[(intub, vent)] = _identity4(vt)
    return rows


def _expco2_rows():
    rows = {}
    for ac, art in enumerate(LNH):
        for vt, vent in enumerate(ZLNH):
            if vent == "ZERO":
                rows[(art, vent)] = _identity4(0)
            else:
                rows[(art, vent)] = _identity4(ac + 1)
    return rows


def alarm_network() -> FittedBn:
    """The 37-node patient-monitoring network with its standard parameters."""
    spec: dict[str, tuple] = {
        "HYPOVOLEMIA": (TF, (), (0.2, 0.8)),
        "LVFAILURE": (TF, (), (0.05, 0.95)),
        "HISTORY": (TF, ("LVFAILURE",), {
            ("TRUE",): (0.9, 0.1), ("FALSE",): (0.01, 0.99)}),
        "LVEDVOLUME": (LNH, ("HYPOVOLEMIA", "LVFAILURE"), {
            ("TRUE", "TRUE"): (0.95, 0.04, 0.01),
            ("TRUE", "FALSE"): (0.98, 0.01, 0.01),
            ("FALSE", "TRUE"): (0.01, 0.09, 0.9),
            ("FALSE", "FALSE"): (0.05, 0.9, 0.05)}),
        "CVP": (LNH, ("LVEDVOLUME",), {
            ("LOW",): (0.95, 0.04, 0.01),
            ("NORMAL",): (0.04, 0.95, 0.01),
            ("HIGH",): (0.01, 0.29, 0.7)}),
        "PCWP": (LNH, ("LVEDVOLUME",), {
            ("LOW",): (0.95, 0.04, 0.01),
            ("NORMAL",): (0.04, 0.95, 0.01),
            ("HIGH",): (0.01, 0.04, 0.95)}),
        "STROKEVOLUME": (LNH, ("HYPOVOLEMIA", "LVFAILURE"), {
            ("TRUE", "TRUE"): (0.98, 0.01, 0.01),
            ("TRUE", "FALSE"): (0.5, 0.49, 0.01),
            ("FALSE", "TRUE"): (0.95, 0.04, 0.01),
            ("FALSE", "FALSE"): (0.05, 0.9, 0.05)}),
        "ERRLOWOUTPUT": (TF, (), (0.05, 0.95)),
        "ERRCAUTER": (TF, (), (0.1, 0.9)),
        "INSUFFANESTH": (TF, (), (0.1, 0.9)),
        "ANAPHYLAXIS": (TF, (), (0.01, 0.99)),
        "TPR": (LNH, ("ANAPHYLAXIS",), {
            ("TRUE",): (0.98, 0.01, 0.01),
            ("FALSE",): (0.3, 0.4, 0.3)}),
        "PULMEMBOLUS": (TF, (), (0.01, 0.99)),
        "PAP": (LNH, ("PULMEMBOLUS",), {
            ("TRUE",): (0.01, 0.19, 0.8),
            ("FALSE",): (0.05, 0.9, 0.05)}),
        "INTUBATION": (("NORMAL", "ESOPHAGEAL", "ONESIDED"), (), (0.92, 0.03, 0.05)),
        "SHUNT": (("NORMAL", "HIGH"), ("INTUBATION", "PULMEMBOLUS"), {
            ("NORMAL", "TRUE"): (0.1, 0.9),
            ("NORMAL", "FALSE"): (0.95, 0.05),
            ("ESOPHAGEAL", "TRUE"): (0.1, 0.9),
            ("ESOPHAGEAL", "FALSE"): (0.95, 0.05),
            ("ONESIDED", "TRUE"): (0.01, 0.99),
            ("ONESIDED", "FALSE"): (0.05, 0.95)}),
        "KINKEDTUBE": (TF, (), (0.04, 0.96)),
        "MINVOLSET": (LNH, (), (0.05, 0.9, 0.05)),
        "VENTMACH": (ZLNH, ("MINVOLSET",), {
            ("LOW",): (0.05, 0.93, 0.01, 0.01),
            ("NORMAL",): (0.05, 0.01, 0.93, 0.01),
            ("HIGH",): (0.05, 0.01, 0.01, 0.93)}),
        "DISCONNECT": (TF, (), (0.1, 0.9)),
        "VENTTUBE": (ZLNH, ("DISCONNECT", "VENTMACH"), {
            **{("TRUE", lv): _identity4(0) for lv in ZLNH},
            **{("FALSE", lv): _identity4(i) for i, lv in enumerate(ZLNH)}}),
        "VENTLUNG": (ZLNH, ("INTUBATION", "KINKEDTUBE", "VENTTUBE"), _ventlung_rows()),
        "VENTALV": (ZLNH, ("INTUBATION", "VENTLUNG"), _ventalv_rows()),
        "MINVOL": (ZLNH, ("INTUBATION", "VENTLUNG"), _minvol_rows()),
        "PRESS": (ZLNH, ("INTUBATION", "KINKEDTUBE", "VENTTUBE"), _press_rows()),
        "FIO2": (("LOW", "NORMAL"), (), (0.05, 0.95)),
        "PVSAT": (LNH, ("FIO2", "VENTALV"), {
            ("LOW", "ZERO"): (0.98, 0.01, 0.01),
            ("LOW", "LOW"): (0.98, 0.01, 0.01),
            ("LOW", "NORMAL"): (0.95, 0.04, 0.01),
            ("LOW", "HIGH"): (0.95, 0.04, 0.01),
            ("NORMAL", "ZERO"): (0.98, 0.01, 0.01),
            ("NORMAL", "LOW"): (0.98, 0.01, 0.01),
            ("NORMAL", "NORMAL"): (0.01, 0.95, 0.04),
            ("NORMAL", "HIGH"): (0.01, 0.01, 0.98)}),
        "SAO2": (LNH, ("PVSAT", "SHUNT"), {
            ("LOW", "NORMAL"): (0.98, 0.01, 0.01),
            ("NORMAL", "NORMAL"): (0.01, 0.98, 0.01),
            ("HIGH", "NORMAL"): (0.01, 0.01, 0.98),
            ("LOW", "HIGH"): (0.98, 0.01, 0.01),
            ("NORMAL", "HIGH"): (0.98, 0.01, 0.01),
            ("HIGH", "HIGH"): (0.69, 0.3, 0.01)}),
        "EXPCO2": (ZLNH, ("ARTCO2", "VENTLUNG"), _expco2_rows()),
        "ARTCO2": (LNH, ("VENTALV",), {
            ("ZERO",): (0.01, 0.01, 0.98),
            ("LOW",): (0.01, 0.01, 0.98),
            ("NORMAL",): (0.04, 0.92, 0.04),
            ("HIGH",): (0.9, 0.09, 0.01)}),
        "CATECHOL": (("NORMAL", "HIGH"),
                     ("ARTCO2", "INSUFFANESTH", "SAO2", "TPR"), _catechol_rows()),
        "HR": (LNH, ("CATECHOL",), {
            ("NORMAL",): (0.05, 0.9, 0.05),
            ("HIGH",): (0.01, 0.09, 0.9)}),
        "HRBP": (LNH, ("ERRLOWOUTPUT", "HR"), {
            ("TRUE", "LOW"): (0.98, 0.01, 0.01),
            ("TRUE", "NORMAL"): (0.4, 0.59, 0.01),
            ("TRUE", "HIGH"): (0.3, 0.4, 0.3),
            ("FALSE", "LOW"): (0.98, 0.01, 0.01),
            ("FALSE", "NORMAL"): (0.01, 0.98, 0.01),
            ("FALSE", "HIGH"): (0.01, 0.01, 0.98)}),
        "HREKG": (LNH, ("ERRCAUTER", "HR"), {
            **{("TRUE", lv): (1 / 3, 1 / 3, 1 / 3) for lv in LNH},
            ("FALSE", "LOW"): (0.98, 0.01, 0.01),
            ("FALSE", "NORMAL"): (0.01, 0.98, 0.01),
            ("FALSE", "HIGH"): (0.01, 0.01, 0.98)}),
        "HRSAT": (LNH, ("ERRCAUTER", "HR"), {
            **{("TRUE", lv): (1 / 3, 1 / 3, 1 / 3) for lv in LNH},
            ("FALSE", "LOW"): (0.98, 0.01, 0.01),
            ("FALSE", "NORMAL"): (0.01, 0.98, 0.01),
            ("FALSE", "HIGH"): (0.01, 0.01, 0.98)}),
        "CO": (LNH, ("HR", "STROKEVOLUME"), {
            ("LOW", "LOW"): (0.98, 0.01, 0.01),
            ("LOW", "NORMAL"): (0.95, 0.04, 0.01),
            ("LOW", "HIGH"): (0.3, 0.69, 0.01),
            ("NORMAL", "LOW"): (0.95, 0.04, 0.01),
            ("NORMAL", "NORMAL"): (0.04, 0.95, 0.01),
            ("NORMAL", "HIGH"): (0.01, 0.3, 0.69),
            ("HIGH", "LOW"): (0.8, 0.19, 0.01),
            ("HIGH", "NORMAL"): (0.01, 0.04, 0.95),
            ("HIGH", "HIGH"): (0.01, 0.01, 0.98)}),
        "BP": (LNH, ("CO", "TPR"), {
            ("LOW", "LOW"): (0.98, 0.01, 0.01),
            ("LOW", "NORMAL"): (0.98, 0.01, 0.01),
            ("LOW", "HIGH"): (0.3, 0.6, 0.1),
            ("NORMAL", "LOW"): (0.98, 0.01, 0.01),
            ("NORMAL", "NORMAL"): (0.1, 0.85, 0.05),
            ("NORMAL", "HIGH"): (0.05, 0.4, 0.55),
            ("HIGH", "LOW"): (0.9, 0.09, 0.01),
            ("HIGH", "NORMAL"): (0.05, 0.2, 0.75),
            ("HIGH", "HIGH"): (0.01, 0.09, 0.9)}),
    }
    return _bn_from_spec(spec)


# -- Sachs-style signalling network -------------------------------------------------

SACHS_NODES = ("Raf", "Mek", "Plcg", "PIP2", "PIP3", "Erk", "Akt",
               "PKA", "PKC", "P38", "Jnk")

SACHS_ARCS = (
    ("PKC", "Raf"), ("PKC", "Mek"), ("PKC", "Jnk"), ("PKC", "P38"), ("PKC", "PKA"),
    ("PKA", "Raf"), ("PKA", "Mek"), ("PKA", "Erk"), ("PKA", "Akt"),
    ("PKA", "Jnk"), ("PKA", "P38"),
    ("Raf", "Mek"), ("Mek", "Erk"), ("Erk", "Akt"),
    ("Plcg", "PIP2"), ("Plcg", "PIP3"), ("PIP3", "PIP2"),
)

# per-child weighting of parent influence: the primary pathway parent dominates
_SACHS_WEIGHTS = {
    "Mek": {"Raf": 2.0, "PKC": 1.0, "PKA": 1.0},
    "Erk": {"Mek": 2.0, "PKA": 1.0},
    "Akt": {"Erk": 2.0, "PKA": 1.0},
    "P38": {"PKC": 2.0, "PKA": 1.0},
    "Jnk": {"PKC": 2.0, "PKA": 1.0},
    "PIP2": {"Plcg": 1.0, "PIP3": 1.5},
}

_SACHS_ROOT_DISTS = {"PKC": (0.40, 0.35, 0.25), "Plcg": (0.50, 0.30, 0.20)}


def sachs_network() -> FittedBn:
    """Consensus signalling structure with synthetic strong monotone CPTs:
    each child peaks at the weighted mean of its parents' levels."""
    levels = ("1", "2", "3")
    dag = Dag(SACHS_NODES, tuple(sorted(SACHS_ARCS)))
    cpts: dict[str, Cpt] = {}
    for v in SACHS_NODES:
        parents = dag.parents(v)
        if not parents:
            dist = _SACHS_ROOT_DISTS.get(v, (0.45, 0.35, 0.20))
            cpts[v] = Cpt(v, (), levels, (), np.array([dist], dtype=float))
            continue
        weights = _SACHS_WEIGHTS.get(v, {})
        w = np.array([weights.get(p, 1.0) for p in parents])
        rows = []
        for combo in itertools.product(range(3), repeat=len(parents)):
            mean = float(np.dot(w, combo) / w.sum())
            peak = int(np.floor(mean + 0.5))
            row = [0.07, 0.07, 0.07]
            row[peak] = 0.76
            if peak > 0:
                row[peak - 1] += 0.06
            if peak < 2:
                row[peak + 1] += 0.04
            rows.append(row)
        arr = np.asarray(rows, dtype=float)
        arr = arr / arr.sum(axis=1, keepdims=True)
        plevels = tuple((levels) for _ in parents)
        cpts[v] = Cpt(v, parents, levels, plevels, arr)
    return FittedBn(dag, cpts)


# condition blocks: (intervened variable or None, clamped level, rows)
SACHS_CONDITIONS = (
    (None, None, 1800),
    ("Mek", "1", 600),
    ("PIP2", "1", 600),
    ("Akt", "1", 600),
    ("PKA", "3", 600),
    ("PKC", "3", 600),
    ("PKC", "1", 600),
)


def sachs_interventional_dataset(seed: int = 20, attach: bool = True) -> Dataset:
    """Synthetic interventional assay: 5,400 rows over the 11 variables plus an
    INT indicator column whose value is the 1-based index of the clamped
    variable (0 = observational)."""
    bn = sachs_network()
    blocks = []
    int_codes: list[int] = []
    for k, (var, level, n) in enumerate(SACHS_CONDITIONS):
        clamp = {var: level} if var else None
        blocks.append(sample(bn, n, seed=seed + k, clamp=clamp))
        idx = 0 if var is None else SACHS_NODES.index(var) + 1
        int_codes.extend([idx] * n)
    cols = []
    for v in SACHS_NODES:
        codes = np.concatenate([b.codes(v) for b in blocks])
        cols.append(Column(v, "factor", codes, ("1", "2", "3")))
    int_levels = tuple(sorted({str(c) for c in int_codes}))
    lut = {lv: i for i, lv in enumerate(int_levels)}
    cols.append(Column("INT", "factor",
                       np.array([lut[str(c)] for c in int_codes]), int_levels))
    ds = Dataset("sachs", tuple(cols))
    if attach:
        ds = attach_interventions(ds, InterventionSpec.from_index_column(ds, "INT"))
    return ds


def sachs_csv_bytes(seed: int = 20) -> bytes:
    """The assay as a space-separated text file, INT column last."""
    from .dataset import export_csv

    return export_csv(sachs_interventional_dataset(seed, attach=False), delimiter="space")


# -- Asia ---------------------------------------------------------------------------

def asia_network() -> FittedBn:
    """The classic 8-node chest-clinic toy network."""
    yn = ("yes", "no")
    spec = {
        "asia": (yn, (), (0.01, 0.99)),
        "tub": (yn, ("asia",), {("yes",): (0.05, 0.95), ("no",): (0.01, 0.99)}),
        "smoke": (yn, (), (0.5, 0.5)),
        "lung": (yn, ("smoke",), {("yes",): (0.1, 0.9), ("no",): (0.01, 0.99)}),
        "bronc": (yn, ("smoke",), {("yes",): (0.6, 0.4), ("no",): (0.3, 0.7)}),
        "either": (yn, ("lung", "tub"), {
            ("yes", "yes"): (1.0, 0.0), ("yes", "no"): (1.0, 0.0),
            ("no", "yes"): (1.0, 0.0), ("no", "no"): (0.0, 1.0)}),
        "xray": (yn, ("either",), {("yes",): (0.98, 0.02), ("no",): (0.05, 0.95)}),
        "dysp": (yn, ("bronc", "either"), {
            ("yes", "yes"): (0.9, 0.1), ("yes", "no"): (0.8, 0.2),
            ("no", "yes"): (0.7, 0.3), ("no", "no"): (0.1, 0.9)}),
    }
    return _bn_from_spec(spec)


REFERENCE_NETWORKS = {
    "alarm": alarm_network,
    "sachs": sachs_network,
    "asia": asia_network,
}
