"""Tabular data ingestion, typing, cleaning and discretization.

Datasets are immutable: every operation returns a new value. Factor columns
store integer level codes (missing = -1) plus an ordered level list; numeric
columns store float64 with NaN for missing. The reserved missing markers on
ingestion are the empty string and the literal "NA".
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ColumnError, DiscretizationError, ParseError

DELIMITERS = {"comma": ",", "semicolon": ";", "tab": "\t", "space": " "}
MISSING_MARKERS = ("", "NA")

DISCRETIZE_METHODS = ("quantile", "interval", "frequency", "kmeans", "hartemink", "hybrid")
HYBRID_FALLBACK = ("kmeans", "quantile", "interval")


def format_value(v: float) -> str:
    """Shortest round-trip float label, with integral values shown bare."""
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def interval_label(lo: float, hi: float, first: bool) -> str:
    """Bin label like "[2.35,5.98]" (first bin) or "(5.98,9.74]" (rest)."""
    open_ = "[" if first else "("
    return f"{open_}{lo:.3g},{hi:.3g}]"


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "factor" | "numeric"
    values: np.ndarray  # int codes (factor) or float64 (numeric)
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("factor", "numeric"):
            raise ColumnError(f"unknown column kind {self.kind!r}")
        if self.kind == "factor":
            if len(set(self.levels)) != len(self.levels):
                raise ColumnError(f"column {self.name!r}: duplicate levels")
            v = np.asarray(self.values, dtype=np.int64)
            if v.size and (v.max(initial=-1) >= len(self.levels) or v.min(initial=0) < -1):
                raise ColumnError(f"column {self.name!r}: code out of level range")
            object.__setattr__(self, "values", v)
        else:
            v = np.asarray(self.values, dtype=np.float64)
            if np.isinf(v).any():
                raise ColumnError(f"column {self.name!r}: non-finite numeric value")
            object.__setattr__(self, "values", v)
            object.__setattr__(self, "levels", ())

    @property
    def missing(self) -> np.ndarray:
        if self.kind == "factor":
            return self.values < 0
        return np.isnan(self.values)

    @property
    def has_missing(self) -> bool:
        cached = getattr(self, "_has_missing", None)
        if cached is None:
            cached = bool(self.missing.any())
            object.__setattr__(self, "_has_missing", cached)
        return cached

    def n_levels(self) -> int:
        return len(self.levels)

    def label(self, row: int) -> str | None:
        if self.kind == "factor":
            c = int(self.values[row])
            return None if c < 0 else self.levels[c]
        v = self.values[row]
        return None if math.isnan(v) else format_value(v)


@dataclass(frozen=True)
class Dataset:
    """Typed columnar table with optional per-variable intervention masks."""

    name: str
    columns: tuple[Column, ...]
    # variable -> bool mask of rows where that variable was intervened on
    interventions: dict[str, np.ndarray] = field(default_factory=dict)
    # columns holding intervention indicators, excluded from learning
    indicator_columns: frozenset[str] = frozenset()

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ColumnError("duplicate column names")
        if any(not n for n in names):
            raise ColumnError("empty column name")
        lens = {len(c.values) for c in self.columns}
        if len(lens) > 1:
            raise ColumnError("columns differ in length")
        for var, mask in self.interventions.items():
            if var not in names:
                raise ColumnError(f"intervention mask for unknown variable {var!r}")
            if len(mask) != self.n_rows:
                raise ColumnError("intervention mask length mismatch")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0].values) if self.columns else 0

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise ColumnError(f"no column named {name!r}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def learning_variables(self) -> list[str]:
        """Factor columns that take part in structure learning."""
        return [c.name for c in self.columns
                if c.kind == "factor" and c.name not in self.indicator_columns]

    def with_column(self, col: Column) -> "Dataset":
        cols = tuple(col if c.name == col.name else c for c in self.columns)
        return replace(self, columns=cols)

    def select_rows(self, idx: np.ndarray) -> "Dataset":
        cols = tuple(replace(c, values=c.values[idx]) for c in self.columns)
        iv = {k: v[idx] for k, v in self.interventions.items()}
        return replace(self, columns=cols, interventions=iv)

    def drop_column(self, name: str) -> "Dataset":
        self.column(name)
        cols = tuple(c for c in self.columns if c.name != name)
        iv = {k: v for k, v in self.interventions.items() if k != name}
        return replace(self, columns=cols, interventions=iv,
                       indicator_columns=self.indicator_columns - {name})

    def codes(self, name: str) -> np.ndarray:
        col = self.column(name)
        if col.kind != "factor":
            raise ColumnError(f"column {name!r} is not a factor")
        return col.values

    def intervened_mask(self, name: str) -> np.ndarray:
        mask = self.interventions.get(name)
        if mask is None:
            return np.zeros(self.n_rows, dtype=bool)
        return mask


@dataclass(frozen=True)
class InterventionSpec:
    """Maps levels of an indicator column to the variables intervened on."""

    column: str
    mapping: dict[str, tuple[str, ...]]  # level label -> intervened variables

    @staticmethod
    def from_index_column(ds: Dataset, column: str) -> "InterventionSpec":
        """Numeric-coded indicator: level k marks the k-th variable (1-based,
        counting in column order and skipping the indicator itself); 0 = none."""
        col = ds.column(column)
        variables = [c.name for c in ds.columns if c.name != column]
        mapping: dict[str, tuple[str, ...]] = {}
        for lv in col.levels:
            k = int(float(lv))
            mapping[lv] = () if k == 0 else (variables[k - 1],)
        return InterventionSpec(column, mapping)


@dataclass(frozen=True)
class DiscretizationPlan:
    method: str = "hybrid"
    bins: int = 3
    hartemink_breaks: int = 3
    hartemink_ibreaks: int = 6

    def __post_init__(self):
        if self.method not in DISCRETIZE_METHODS:
            raise DiscretizationError(f"unknown method {self.method!r}")
        if self.bins < 2:
            raise DiscretizationError("bins must be >= 2")
        if not (self.hartemink_ibreaks >= self.hartemink_breaks >= 2):
            raise DiscretizationError("need ibreaks >= breaks >= 2")


# -- ingestion -----------------------------------------------------------------

def load_csv(source, delimiter: str = "comma", header: bool = True,
             factor_level_threshold: int = 53, name: str = "dataset") -> Dataset:
    """Stream a delimited text file into a typed Dataset.

    Columns with fewer than ``factor_level_threshold`` distinct values become
    factors (levels sorted lexicographically); others become numeric when every
    value parses as a number, and stay factors otherwise. Memory grows with
    the number of distinct levels plus the output codes, not the raw text.
    """
    if isinstance(source, bytes):
        stream = io.StringIO(source.decode("utf-8-sig"))
    elif isinstance(source, str):
        stream = io.StringIO(source)
    else:
        stream = io.TextIOWrapper(source, encoding="utf-8-sig")
    delim = DELIMITERS.get(delimiter)
    if delim is None:
        raise ParseError(f"unknown delimiter {delimiter!r}")
    reader = csv.reader(stream, delimiter=delim)

    col_names: list[str] | None = None
    level_maps: list[dict[str, int]] = []
    codes: list[list[int]] = []
    row_no = 0
    for row in reader:
        row_no += 1
        if not row:
            continue  # csv yields [] for blank lines
        if col_names is None:
            if header:
                col_names = [f.strip() for f in row]
                if len(set(col_names)) != len(col_names):
                    raise ParseError("duplicate header names")
                if any(not n for n in col_names):
                    raise ParseError("empty header name")
                level_maps = [{} for _ in col_names]
                codes = [[] for _ in col_names]
                continue
            col_names = [f"V{i+1}" for i in range(len(row))]
            level_maps = [{} for _ in col_names]
            codes = [[] for _ in col_names]
        if len(row) != len(col_names):
            raise ParseError(f"row {row_no}: expected {len(col_names)} fields, got {len(row)}")
        for j, raw in enumerate(row):
            val = raw.strip()
            if val in MISSING_MARKERS:
                codes[j].append(-1)
                continue
            code = level_maps[j].get(val)
            if code is None:
                code = len(level_maps[j])
                level_maps[j][val] = code
            codes[j].append(code)
    if col_names is None:
        raise ParseError("empty input")

    columns = []
    for j, cname in enumerate(col_names):
        raw_levels = list(level_maps[j])
        arr = np.asarray(codes[j], dtype=np.int64)
        if len(raw_levels) < factor_level_threshold:
            columns.append(_factor_from_raw(cname, raw_levels, arr))
        else:
            parsed = _try_parse_floats(raw_levels)
            if parsed is None:
                columns.append(_factor_from_raw(cname, raw_levels, arr))
            else:
                values = np.full(len(arr), np.nan)
                ok = arr >= 0
                values[ok] = parsed[arr[ok]]
                columns.append(Column(cname, "numeric", values))
    return Dataset(name, tuple(columns))


def _factor_from_raw(name: str, raw_levels: list[str], arr: np.ndarray) -> Column:
    order = sorted(range(len(raw_levels)), key=lambda i: raw_levels[i])
    remap = np.full(len(raw_levels) + 1, -1, dtype=np.int64)
    for new, old in enumerate(order):
        remap[old] = new
    return Column(name, "factor", remap[arr], tuple(raw_levels[i] for i in order))


def _try_parse_floats(levels: list[str]) -> np.ndarray | None:
    try:
        vals = np.array([float(v) for v in levels])
    except ValueError:
        return None
    if np.isinf(vals).any() or np.isnan(vals).any():
        return None
    return vals


def export_csv(ds: Dataset, delimiter: str = "comma") -> bytes:
    """Serialize a dataset to RFC-4180 CSV; load_csv inverts it."""
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=DELIMITERS[delimiter], lineterminator="\n")
    w.writerow(ds.column_names)
    for i in range(ds.n_rows):
        row = []
        for c in ds.columns:
            lab = c.label(i)
            row.append("NA" if lab is None else lab)
        w.writerow(row)
    return buf.getvalue().encode("utf-8")


# -- cleaning and typing --------------------------------------------------------

def coerce_type(ds: Dataset, column: str, to: str) -> Dataset:
    col = ds.column(column)
    if to not in ("factor", "numeric"):
        raise ColumnError(f"unknown target kind {to!r}")
    if col.kind == to:
        return ds
    if to == "factor":
        vals = col.values
        distinct = np.unique(vals[~np.isnan(vals)])
        levels = tuple(format_value(v) for v in distinct)  # ascending numeric order
        lut = {v: i for i, v in enumerate(distinct)}
        out = np.full(len(vals), -1, dtype=np.int64)
        for i, v in enumerate(vals):
            if not math.isnan(v):
                out[i] = lut[v]
        return ds.with_column(Column(column, "factor", out, levels))
    # factor -> numeric: every level must parse
    parsed = []
    for lv in col.levels:
        try:
            parsed.append(float(lv))
        except ValueError:
            raise ColumnError(f"column {column!r}: level {lv!r} is not numeric")
    table = np.asarray(parsed)
    out = np.full(len(col.values), np.nan)
    ok = col.values >= 0
    out[ok] = table[col.values[ok]]
    return ds.with_column(Column(column, "numeric", out))


def impute_mode(ds: Dataset) -> Dataset:
    """Fill missing factor cells with the column mode (lexicographic tie-break)
    and missing numeric cells with the column median. Idempotent."""
    cols = []
    for c in ds.columns:
        miss = c.missing
        if not miss.any():
            cols.append(c)
            continue
        if miss.all():
            raise ColumnError(f"column {c.name!r} is entirely missing")
        if c.kind == "factor":
            counts = np.bincount(c.values[~miss], minlength=len(c.levels))
            top = counts.max()
            best = min((c.levels[k], k) for k in range(len(c.levels)) if counts[k] == top)[1]
            vals = c.values.copy()
            vals[miss] = best
            cols.append(Column(c.name, "factor", vals, c.levels))
        else:
            med = float(np.median(c.values[~miss]))
            vals = c.values.copy()
            vals[miss] = med
            cols.append(Column(c.name, "numeric", vals))
    return replace(ds, columns=tuple(cols))


def attach_interventions(ds: Dataset, spec: InterventionSpec) -> Dataset:
    """Record per-row intervened-variable sets from an indicator column.

    The indicator column is kept in the table but excluded from structure
    learning; scoring consumes the per-variable row masks.
    """
    col = ds.column(spec.column)
    if col.kind != "factor":
        raise ColumnError(f"indicator column {spec.column!r} must be a factor")
    for lv in col.levels:
        if lv not in spec.mapping:
            raise ColumnError(f"intervention mapping missing level {lv!r}")
    names = set(ds.column_names)
    masks: dict[str, np.ndarray] = {}
    for lv, targets in spec.mapping.items():
        for var in targets:
            if var not in names:
                raise ColumnError(f"intervention mapping references unknown variable {var!r}")
    for code, lv in enumerate(col.levels):
        rows = col.values == code
        for var in spec.mapping[lv]:
            masks.setdefault(var, np.zeros(ds.n_rows, dtype=bool))
            masks[var] |= rows
    merged = dict(ds.interventions)
    for var, m in masks.items():
        merged[var] = merged.get(var, np.zeros(ds.n_rows, dtype=bool)) | m
    return replace(ds, interventions=merged,
                   indicator_columns=ds.indicator_columns | {spec.column})


# -- summaries -------------------------------------------------------------------

def summarize(ds: Dataset, column: str) -> dict[str, int]:
    """Frequency table for a factor column; 10 equal-width bins for numeric."""
    col = ds.column(column)
    if ds.n_rows == 0:
        return {}
    if col.kind == "factor":
        counts = np.bincount(col.values[col.values >= 0], minlength=len(col.levels))
        out = {lv: int(n) for lv, n in zip(col.levels, counts)}
        n_missing = int(col.missing.sum())
        if n_missing:
            out["NA"] = n_missing
        return out
    vals = col.values[~np.isnan(col.values)]
    if vals.size == 0:
        return {"NA": ds.n_rows}
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        return {interval_label(lo, hi, True): int(vals.size)}
    edges = np.linspace(lo, hi, 11)
    counts, _ = np.histogram(vals, bins=edges)
    out = {interval_label(edges[i], edges[i + 1], i == 0): int(counts[i]) for i in range(10)}
    n_missing = ds.n_rows - int(vals.size)
    if n_missing:
        out["NA"] = n_missing
    return out


# -- discretization ---------------------------------------------------------------

def discretize(ds: Dataset, plan: DiscretizationPlan, targets) -> Dataset:
    """Convert numeric columns to interval-labelled factors.

    hybrid tries hartemink first, then falls back per column through kmeans,
    quantile and interval in that order.
    """
    targets = list(targets)
    for t in targets:
        if ds.column(t).kind != "numeric":
            raise ColumnError(f"discretization target {t!r} is not numeric")
    if plan.method == "hartemink":
        return _discretize_hartemink(ds, plan, targets)
    if plan.method == "hybrid":
        try:
            return _discretize_hartemink(ds, plan, targets)
        except DiscretizationError:
            pass
        out = ds
        for t in targets:
            out = out.with_column(_discretize_hybrid_column(out, t, plan))
        return out
    out = ds
    for t in targets:
        col = out.column(t)
        boundaries = _cut_points(col, plan.method, plan.bins)
        out = out.with_column(_bin_column(col, boundaries))
    return out


def _discretize_hybrid_column(ds: Dataset, target: str, plan: DiscretizationPlan) -> Column:
    col = ds.column(target)
    last_err: Exception | None = None
    for method in HYBRID_FALLBACK:
        try:
            return _bin_column(col, _cut_points(col, method, plan.bins))
        except DiscretizationError as e:
            last_err = e
    raise DiscretizationError(f"all discretization methods failed for {target!r}: {last_err}",
                              column=target)


def _finite(col: Column) -> np.ndarray:
    vals = col.values[~np.isnan(col.values)]
    if vals.size == 0:
        raise DiscretizationError(f"column {col.name!r} has no observed values", col.name)
    return vals


def _cut_points(col: Column, method: str, bins: int) -> np.ndarray:
    """Interior boundaries (len bins-1); bin i is (b[i-1], b[i]]."""
    vals = _finite(col)
    distinct = np.unique(vals)
    if distinct.size < 2:
        raise DiscretizationError(f"column {col.name!r} is degenerate (single value)", col.name)
    if method in ("quantile", "frequency", "kmeans") and bins > distinct.size:
        raise DiscretizationError(
            f"column {col.name!r}: {bins} bins exceed {distinct.size} distinct values", col.name)
    if method == "interval":
        lo, hi = float(vals.min()), float(vals.max())
        return np.linspace(lo, hi, bins + 1)[1:-1]
    if method == "quantile":
        qs = np.quantile(vals, np.linspace(0, 1, bins + 1)[1:-1])
        if np.unique(qs).size != len(qs) or qs[0] <= vals.min() or (len(qs) and qs[-1] >= vals.max()):
            raise DiscretizationError(
                f"column {col.name!r}: quantile ties give fewer than {bins} bins", col.name)
        return qs
    if method == "frequency":
        return _frequency_cuts(col.name, vals, bins)
    if method == "kmeans":
        return _kmeans_cuts(col.name, vals, bins)
    raise DiscretizationError(f"unknown method {method!r}")


def _frequency_cuts(name: str, vals: np.ndarray, bins: int) -> np.ndarray:
    """Equal-count rank cuts, keeping runs of equal values in one bin."""
    s = np.sort(vals)
    n = len(s)
    cuts = []
    prev_idx = 0
    for k in range(1, bins):
        idx = max(prev_idx + 1, round(k * n / bins))
        # push the cut forward past any tied run so equal values stay together
        while idx < n and s[idx] == s[idx - 1]:
            idx += 1
        if idx >= n:
            raise DiscretizationError(
                f"column {name!r}: ties leave fewer than {bins} frequency bins", name)
        cuts.append((s[idx - 1] + s[idx]) / 2.0)
        prev_idx = idx
    return np.asarray(cuts)


def _kmeans_cuts(name: str, vals: np.ndarray, bins: int) -> np.ndarray:
    """1-D Lloyd's algorithm initialized from the quantile partition.

    Boundaries land at midpoints between adjacent cluster centers, so the
    within-cluster sum of squares never exceeds the quantile split's.
    """
    s = np.sort(vals)
    n = len(s)
    # initial partition: equal-probability slices
    edges = [round(k * n / bins) for k in range(bins + 1)]
    assign = np.empty(n, dtype=np.int64)
    for k in range(bins):
        assign[edges[k]:edges[k + 1]] = k
    for _ in range(200):
        centers = np.array([s[assign == k].mean() if (assign == k).any() else np.nan
                            for k in range(bins)])
        if np.isnan(centers).any():
            raise DiscretizationError(f"column {name!r}: k-means lost a cluster", name)
        order = np.argsort(centers, kind="stable")
        centers = centers[order]
        mids = (centers[:-1] + centers[1:]) / 2.0
        new_assign = np.searchsorted(mids, s, side="left")
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    if np.unique(assign).size < bins:
        raise DiscretizationError(f"column {name!r}: k-means produced empty bins", name)
    centers = np.array([s[assign == k].mean() for k in range(bins)])
    return (centers[:-1] + centers[1:]) / 2.0


def _bin_column(col: Column, boundaries: np.ndarray) -> Column:
    vals = col.values
    finite = _finite(col)
    lo, hi = float(finite.min()), float(finite.max())
    bounds = [lo] + [float(b) for b in boundaries] + [hi]
    labels = tuple(interval_label(bounds[i], bounds[i + 1], i == 0)
                   for i in range(len(bounds) - 1))
    if len(set(labels)) != len(labels):
        raise DiscretizationError(
            f"column {col.name!r}: bin labels collide at 3 significant digits", col.name)
    codes = np.full(len(vals), -1, dtype=np.int64)
    ok = ~np.isnan(vals)
    codes[ok] = np.searchsorted(boundaries, vals[ok], side="left")
    return Column(col.name, "factor", codes, labels)


# -- Hartemink information-preserving discretization ------------------------------

def _mutual_information(x: np.ndarray, rx: int, y: np.ndarray, ry: int) -> float:
    """Plug-in MI of two code vectors (missing codes < 0 are dropped)."""
    ok = (x >= 0) & (y >= 0)
    if not ok.any():
        return 0.0
    joint = np.bincount(x[ok] * ry + y[ok], minlength=rx * ry).reshape(rx, ry).astype(float)
    n = joint.sum()
    px = joint.sum(axis=1) / n
    py = joint.sum(axis=0) / n
    p = joint / n
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.log(p / np.outer(px, py))
        terms = np.where(p > 0, p * ratio, 0.0)
    return float(terms.sum())


def _discretize_hartemink(ds: Dataset, plan: DiscretizationPlan, targets: list[str]) -> Dataset:
    """Quantile-seed all targets at ibreaks levels, then greedily merge adjacent
    intervals, one merge per variable per sweep, keeping the merge that loses
    the least total pairwise mutual information with every other variable."""
    breaks, ibreaks = plan.hartemink_breaks, plan.hartemink_ibreaks
    state: dict[str, tuple[np.ndarray, list[float]]] = {}
    for t in targets:
        col = ds.column(t)
        cuts = list(_cut_points(col, "quantile", ibreaks))
        binned = _bin_column(col, np.asarray(cuts))
        state[t] = (binned.values, cuts)

    others = [c.name for c in ds.columns if c.name not in targets and c.kind == "factor"
              and c.name not in ds.indicator_columns]

    def total_mi(t: str, codes: np.ndarray, n_levels: int) -> float:
        total = 0.0
        for o in others:
            oc = ds.column(o)
            total += _mutual_information(codes, n_levels, oc.values, len(oc.levels))
        for t2 in targets:
            if t2 == t:
                continue
            codes2, cuts2 = state[t2]
            total += _mutual_information(codes, n_levels, codes2, len(cuts2) + 1)
        return total

    if not others and len(targets) < 2:
        raise DiscretizationError("hartemink needs at least two variables", targets[0])

    progress = True
    while progress:
        progress = False
        for t in targets:
            codes, cuts = state[t]
            n_levels = len(cuts) + 1
            if n_levels <= breaks:
                continue
            best: tuple[float, int] | None = None
            for k in range(n_levels - 1):
                merged = np.where(codes > k, codes - 1, codes)
                merged[codes < 0] = -1
                mi = total_mi(t, merged, n_levels - 1)
                if best is None or mi > best[0] + 1e-12:
                    best = (mi, k)
            _, k = best
            merged = np.where(codes > k, codes - 1, codes)
            merged[codes < 0] = -1
            del cuts[k]
            state[t] = (merged, cuts)
            progress = True

    out = ds
    for t in targets:
        col = out.column(t)
        out = out.with_column(_bin_column(col, np.asarray(state[t][1])))
    return out
