"""Right-censored survival data with typed covariates, and CSV ingestion."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Column",
    "SurvivalDataset",
    "SurvivalDataError",
    "load_schema",
    "ingest_survival_csv",
    "write_survival_csv",
    "LIVER_SCHEMA",
]

KINDS = ("continuous", "ordinal", "categorical")


class SurvivalDataError(ValueError):
    pass


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SurvivalDataError(f"column {self.name!r}: unknown type {self.kind!r}")
        if self.categories is not None:
            object.__setattr__(self, "categories", tuple(str(c) for c in self.categories))

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"


@dataclass
class SurvivalDataset:
    """Times, event flags (1 exact, 0 right-censored) and an n x q covariate table.

    Categorical columns are stored as integer codes into ``columns[j].categories``.
    """

    times: np.ndarray
    events: np.ndarray
    covariates: np.ndarray
    columns: list[Column] = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.events = np.asarray(self.events).astype(np.int8)
        cov = np.asarray(self.covariates, dtype=float)
        if cov.ndim == 1:
            cov = cov[:, None]
        self.covariates = cov
        n = len(self.times)
        if len(self.events) != n or cov.shape[0] != n:
            raise SurvivalDataError("times, events and covariates differ in length")
        if n == 0:
            raise SurvivalDataError("empty dataset")
        if np.any(~np.isfinite(self.times)) or np.any(self.times <= 0):
            raise SurvivalDataError("survival times must be positive and finite")
        if not np.isin(self.events, (0, 1)).all():
            raise SurvivalDataError("event flags must be 0 or 1")
        if np.any(~np.isfinite(cov)):
            raise SurvivalDataError("missing or non-finite covariate values")
        if not self.columns:
            self.columns = [Column(f"x{j + 1}", "continuous") for j in range(cov.shape[1])]
        if len(self.columns) != cov.shape[1]:
            raise SurvivalDataError("column declarations do not match covariate table")
        self.log_times = np.log(self.times)

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def n_covariates(self) -> int:
        return self.covariates.shape[1]

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def subset(self, idx) -> "SurvivalDataset":
        idx = np.asarray(idx)
        return SurvivalDataset(self.times[idx], self.events[idx], self.covariates[idx], list(self.columns))


def load_schema(path_or_dict) -> dict:
    """Schema JSON: ``{"time": col, "event": col, "covariates": [{"name", "type", "categories"?}]}``."""
    if isinstance(path_or_dict, dict):
        schema = dict(path_or_dict)
    else:
        schema = json.loads(Path(path_or_dict).read_text())
    schema.setdefault("time", "time")
    schema.setdefault("event", "event")
    if "covariates" not in schema:
        raise SurvivalDataError("schema lists no covariates")
    return schema


def _columns_from_schema(schema: dict) -> list[Column]:
    cols = []
    for c in schema["covariates"]:
        cols.append(Column(c["name"], c.get("type", c.get("kind", "continuous")), c.get("categories")))
    return cols


def ingest_survival_csv(path: str | Path, schema) -> SurvivalDataset:
    """Read a survival CSV against a schema; reject bad rows by line number.

    Errors name the file line (the header is line 1) for malformed numbers,
    unknown categories, non-positive times, event flags outside {0, 1} and
    missing values.
    """
    schema = load_schema(schema)
    cols = _columns_from_schema(schema)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SurvivalDataError(f"{path}: empty file") from None
        rows = list(reader)
    needed = [schema["time"], schema["event"]] + [c.name for c in cols]
    missing = [h for h in needed if h not in header]
    if missing:
        raise SurvivalDataError(f"{path}: header lacks columns {missing}")
    pos = {h: i for i, h in enumerate(header)}

    observed: list[dict[str, int]] = [
        {lab: k for k, lab in enumerate(c.categories)} if c.categories else {} for c in cols
    ]
    times, events, table = [], [], []
    errors = []
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not v.strip() for v in row):
            continue
        try:
            vals = [row[pos[h]].strip() for h in needed]
        except IndexError:
            errors.append(f"line {lineno}: too few fields")
            continue
        if any(v == "" or v.upper() in ("NA", "NAN") for v in vals):
            errors.append(f"line {lineno}: missing value")
            continue
        try:
            t = float(vals[0])
        except ValueError:
            errors.append(f"line {lineno}: malformed time {vals[0]!r}")
            continue
        if not (t > 0 and math.isfinite(t)):
            errors.append(f"line {lineno}: non-positive time {vals[0]!r}")
            continue
        if vals[1] not in ("0", "1"):
            errors.append(f"line {lineno}: event flag {vals[1]!r} not in {{0, 1}}")
            continue
        rec = []
        bad = False
        for c, lookup, v in zip(cols, observed, vals[2:]):
            if c.is_categorical:
                if v not in lookup:
                    if c.categories is not None:
                        errors.append(f"line {lineno}: unknown category {v!r} for {c.name}")
                        bad = True
                        break
                    lookup[v] = len(lookup)
                rec.append(float(lookup[v]))
            else:
                try:
                    rec.append(float(v))
                except ValueError:
                    errors.append(f"line {lineno}: malformed number {v!r} for {c.name}")
                    bad = True
                    break
        if bad:
            continue
        times.append(t)
        events.append(int(vals[1]))
        table.append(rec)
    if errors:
        raise SurvivalDataError(f"{path}: " + "; ".join(errors))
    if not times:
        raise SurvivalDataError(f"{path}: no data rows")
    final_cols = []
    for c, lookup in zip(cols, observed):
        if c.is_categorical and c.categories is None:
            c = Column(c.name, c.kind, tuple(sorted(lookup, key=lookup.get)))
        final_cols.append(c)
    return SurvivalDataset(np.array(times), np.array(events), np.array(table, dtype=float).reshape(len(times), len(cols)), final_cols)


def write_survival_csv(path: str | Path, data: SurvivalDataset) -> dict:
    """Write ``data`` as CSV and return the matching schema dict."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "event"] + data.names)
        for i in range(data.n):
            row = [repr(float(data.times[i])), int(data.events[i])]
            for c, v in zip(data.columns, data.covariates[i]):
                row.append(c.categories[int(v)] if c.is_categorical else repr(float(v)))
            w.writerow(row)
    return {
        "time": "time",
        "event": "event",
        "covariates": [
            {"name": c.name, "type": c.kind, **({"categories": list(c.categories)} if c.categories else {})}
            for c in data.columns
        ],
    }


# Covariates of the liver metastases data (622 patients).
LIVER_SCHEMA = {
    "time": "time",
    "event": "event",
    "covariates": [
        {"name": "DLM", "type": "continuous"},
        {"name": "AGE", "type": "ordinal"},
        {"name": "TD", "type": "categorical"},
        {"name": "SEX", "type": "categorical"},
        {"name": "LI", "type": "categorical"},
        {"name": "NLM", "type": "ordinal"},
        {"name": "LRD", "type": "categorical"},
        {"name": "TNM", "type": "categorical"},
        {"name": "LOC", "type": "categorical"},
    ],
}
