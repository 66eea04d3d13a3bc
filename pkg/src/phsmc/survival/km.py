"""Kaplan-Meier product-limit estimator and per-leaf survival tables."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .data import SurvivalDataset
from .tree import Node, partition

__all__ = ["kaplan_meier", "km_curve", "leaf_km_table", "write_km_table", "read_km_table", "DEFAULT_TIMES"]

DEFAULT_TIMES = (12.0, 24.0, 36.0)


def km_curve(times, events) -> tuple[np.ndarray, np.ndarray]:
    """Distinct event times and the survival estimate just after each."""
    t = np.asarray(times, dtype=float)
    e = np.asarray(events).astype(bool)
    if len(t) == 0:
        raise ValueError("empty input")
    if len(t) != len(e):
        raise ValueError("times and events differ in length")
    event_times = np.unique(t[e])
    if len(event_times) == 0:
        return event_times, event_times.copy()
    at_risk = np.array([np.sum(t >= u) for u in event_times])
    deaths = np.array([np.sum((t == u) & e) for u in event_times])
    return event_times, np.cumprod(1.0 - deaths / at_risk)


def kaplan_meier(times, events, eval_times) -> np.ndarray:
    """S(t) = prod over event times t_(i) <= t of (1 - d_i / n_i), right-continuous."""
    ut, surv = km_curve(times, events)
    ev = np.atleast_1d(np.asarray(eval_times, dtype=float))
    pos = np.searchsorted(ut, ev, side="right")
    out = np.ones(len(ev))
    mask = pos > 0
    out[mask] = surv[pos[mask] - 1]
    return out


def leaf_km_table(tree: Node, data: SurvivalDataset, at=DEFAULT_TIMES) -> list[dict]:
    """One row per leaf (left to right): leaf id, size and S at each time."""
    rows = []
    for k, idx in enumerate(partition(tree, data.covariates), start=1):
        row = {"leaf": k, "size": int(len(idx))}
        if len(idx):
            s = kaplan_meier(data.times[idx], data.events[idx], at)
        else:
            s = np.full(len(at), np.nan)
        for t, v in zip(at, s):
            row[f"S{t:g}"] = float(v)
        rows.append(row)
    return rows


def write_km_table(path: str | Path, rows: list[dict]) -> None:
    if not rows:
        raise ValueError("no rows")
    fields = list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def read_km_table(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        out = []
        for r in csv.DictReader(fh):
            out.append({k: (int(v) if k in ("leaf", "size") else float(v)) for k, v in r.items()})
    return out
