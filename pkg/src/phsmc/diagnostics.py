"""Monte Carlo summaries: traces, inclusion probabilities, MCSE, histograms.

Export formats
--------------
* trace CSV: header row, one row per iteration.
* report JSON: ``inclusion_probabilities``, ``mcse``, ``mcse_window``,
  ``acceptance_rates``, ``swap_rate``, ``histogram`` (``lo``, ``hi``,
  ``counts``, ``underflow``, ``overflow``).
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

__all__ = [
    "Trace",
    "RunReport",
    "Histogram",
    "inclusion_probabilities",
    "autocovariance",
    "initial_positive_window",
    "mcse",
    "mcse_with_window",
    "histogram",
    "write_trace_csv",
    "read_trace_csv",
    "write_histogram_csv",
    "read_histogram_csv",
]


@dataclass
class Trace:
    """Sample path of the reported chain plus run statistics.

    ``states`` is a numpy array for scalar and binary-vector chains and a list
    for anything else (trees). ``chains`` holds every chain's path when the
    sampler was asked to record them all.
    """

    states: Any
    log_density: np.ndarray
    acceptance_rates: np.ndarray
    swap_attempts: int = 0
    swap_accepts: int = 0
    meta: dict = field(default_factory=dict)
    chains: list | None = None

    def __len__(self):
        return len(self.states)

    @property
    def swap_rate(self) -> float:
        return self.swap_accepts / self.swap_attempts if self.swap_attempts else 0.0


@dataclass
class Histogram:
    lo: float
    hi: float
    counts: np.ndarray
    underflow: int = 0
    overflow: int = 0

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, len(self.counts) + 1)

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "counts": [int(c) for c in self.counts],
            "underflow": int(self.underflow),
            "overflow": int(self.overflow),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Histogram":
        return cls(
            float(d["lo"]),
            float(d["hi"]),
            np.asarray(d["counts"], dtype=np.int64),
            int(d.get("underflow", 0)),
            int(d.get("overflow", 0)),
        )


@dataclass
class RunReport:
    inclusion_probabilities: list[float] | None = None
    mcse: list[float] | None = None
    mcse_window: list[int] | None = None
    acceptance_rates: list[float] = field(default_factory=list)
    swap_rate: float = 0.0
    histogram: Histogram | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["histogram"] = self.histogram.to_dict() if self.histogram is not None else None
        return d

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def from_json(cls, path: str | Path) -> "RunReport":
        d = json.loads(Path(path).read_text())
        hist = d.pop("histogram", None)
        report = cls(**d)
        report.histogram = Histogram.from_dict(hist) if hist is not None else None
        return report


def inclusion_probabilities(states) -> np.ndarray:
    """Coordinate-wise mean of a trace of binary vectors."""
    arr = np.asarray(states)
    if arr.size == 0 or arr.shape[0] == 0:
        raise ValueError("empty trace")
    if arr.ndim != 2:
        raise ValueError("expected a trace of equal-length binary vectors")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("trace entries must be 0 or 1")
    return arr.mean(axis=0)


def autocovariance(x) -> np.ndarray:
    """Biased (1/N) autocovariance of a scalar trace at lags 0..N-1, via FFT."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    y = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(y, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    return acov / n


def initial_positive_window(acov: np.ndarray) -> int:
    """Smallest even W with A(W) + A(W+1) <= 0 (pairs (0,1), (2,3), ...)."""
    n = len(acov)
    w = 0
    while w + 1 < n:
        if acov[w] + acov[w + 1] <= 0:
            return w
        w += 2
    return w


def mcse_with_window(x) -> tuple[float, int]:
    """MCSE of the mean of ``x`` and the truncation window used."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 100:
        raise ValueError(f"MCSE needs at least 100 draws, got {n}")
    if np.all(x == x[0]):
        return 0.0, 0
    acov = autocovariance(x)
    w = initial_positive_window(acov)
    if w == 0:
        # first pair already non-positive: fall back to the lag-0 term
        w = 1
    h = np.arange(1, w)
    var = acov[0] + 2.0 * np.sum((1.0 - h / n) * acov[1:w])
    return float(np.sqrt(max(var, 0.0) / n)), int(w)


def mcse(x) -> float:
    """Monte Carlo standard error of the trace mean, windowed autocovariance."""
    return mcse_with_window(x)[0]


def histogram(x, lo: float, hi: float, n_bins: int) -> Histogram:
    """Equal-width bins on [lo, hi) with separate underflow/overflow counts."""
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if not lo < hi:
        raise ValueError("need lo < hi")
    x = np.asarray(x, dtype=float).ravel()
    idx = np.floor((x - lo) / (hi - lo) * n_bins).astype(np.int64)
    under = int(np.sum(x < lo))
    over = int(np.sum(x >= hi))
    inside = idx[(x >= lo) & (x < hi)]
    inside = np.clip(inside, 0, n_bins - 1)
    counts = np.bincount(inside, minlength=n_bins)
    return Histogram(float(lo), float(hi), counts, under, over)


def write_trace_csv(path: str | Path, columns: dict[str, Sequence]) -> None:
    """Write named columns of equal length, one row per iteration."""
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    lengths = {len(c) for c in cols}
    if len(lengths) != 1:
        raise ValueError("trace columns differ in length")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else int(v) for v in row])


def read_trace_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for i, name in enumerate(header):
        vals = [r[i] for r in body]
        try:
            out[name] = np.array([int(v) for v in vals], dtype=np.int64)
        except ValueError:
            out[name] = np.array([float(v) for v in vals])
    return out


def write_histogram_csv(path: str | Path, hist: Histogram) -> None:
    edges = hist.edges
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "count"])
        w.writerow(["-inf", repr(hist.lo), hist.underflow])
        for a, b, c in zip(edges[:-1], edges[1:], hist.counts):
            w.writerow([repr(float(a)), repr(float(b)), int(c)])
        w.writerow([repr(hist.hi), "inf", hist.overflow])


def read_histogram_csv(path: str | Path) -> Histogram:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    under, body, over = rows[0], rows[1:-1], rows[-1]
    counts = np.array([int(r[2]) for r in body], dtype=np.int64)
    return Histogram(float(body[0][0]), float(body[-1][1]), counts, int(under[2]), int(over[2]))
