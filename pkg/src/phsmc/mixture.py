"""Scalar Gaussian mixture target and the uniform random-walk proposal."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .core import Proposal, StateSpaceKind, TargetDistribution

__all__ = [
    "GaussianMixture",
    "FIVE_MODE_MIXTURE",
    "mixture_log_density",
    "random_mixture",
    "UniformWalkProposal",
    "MixtureTarget",
    "mode_regions",
]

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class GaussianMixture:
    means: tuple[float, ...]
    stddevs: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        for name in ("means", "stddevs", "weights"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        k = len(self.means)
        if k == 0 or len(self.stddevs) != k or len(self.weights) != k:
            raise ValueError("means, stddevs and weights must have equal, non-zero length")
        if any(s <= 0 for s in self.stddevs):
            raise ValueError("standard deviations must be positive")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {sum(self.weights)!r}, not 1")

    @classmethod
    def normalized(cls, means, stddevs, raw_weights) -> "GaussianMixture":
        w = np.asarray(raw_weights, dtype=float)
        w = w / w.sum()
        # push the rounding residue into the largest weight
        w[np.argmax(w)] += 1.0 - w.sum()
        return cls(tuple(means), tuple(stddevs), tuple(w))

    def __len__(self):
        return len(self.means)

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps({"means": self.means, "stddevs": self.stddevs, "weights": self.weights}, indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, text_or_path) -> "GaussianMixture":
        p = Path(str(text_or_path))
        text = p.read_text() if not str(text_or_path).lstrip().startswith("{") and p.exists() else str(text_or_path)
        d = json.loads(text)
        return cls(tuple(d["means"]), tuple(d["stddevs"]), tuple(d["weights"]))

    def pdf(self, x) -> np.ndarray:
        return np.exp(mixture_log_density(self, x))


# Five-component mixture used for the sampling comparison (means, sds, weights).
FIVE_MODE_MIXTURE = GaussianMixture.normalized(
    (-8.85, -2.65, 2.63, 3.85, 4.35),
    (0.18, 0.51, 0.50, 0.42, 0.24),
    (0.22, 0.22, 0.23, 0.15, 0.18),
)


def mixture_log_density(m: GaussianMixture, x):
    """log sum_k w_k N(x; mu_k, sigma_k^2), evaluated with log-sum-exp."""
    mu = np.asarray(m.means)
    sd = np.asarray(m.stddevs)
    lw = np.log(np.asarray(m.weights))
    xa = np.asarray(x, dtype=float)
    z = (xa[..., None] - mu) / sd
    terms = lw - np.log(sd) - _LOG_SQRT_2PI - 0.5 * z * z
    out = logsumexp(terms, axis=-1)
    return float(out) if np.ndim(x) == 0 else out


def random_mixture(
    n_components: int = 5,
    mean_range: tuple[float, float] = (-10.0, 10.0),
    sd_range: tuple[float, float] = (0.1, 1.0),
    weight_range: tuple[float, float] = (1.0, 5.0),
    seed: int | None = None,
) -> GaussianMixture:
    """Draw means, sds and unnormalised weights uniformly, then normalise."""
    if n_components < 1:
        raise ValueError("n_components must be >= 1")
    for lo, hi in (mean_range, sd_range, weight_range):
        if not lo < hi:
            raise ValueError(f"bad range ({lo}, {hi})")
    if sd_range[0] < 0 or weight_range[0] < 0:
        raise ValueError("sd and weight ranges must be non-negative")
    rng = np.random.default_rng(seed)
    means = rng.uniform(*mean_range, n_components)
    sds = rng.uniform(*sd_range, n_components)
    w = rng.uniform(*weight_range, n_components)
    return GaussianMixture.normalized(means, sds, w)


class MixtureTarget(TargetDistribution):
    kind = StateSpaceKind.CONTINUOUS_SCALAR

    def __init__(self, mixture: GaussianMixture):
        self.mixture = mixture
        # scalar fast path
        self._terms = [
            (mu, 1.0 / sd, math.log(w) - math.log(sd) - _LOG_SQRT_2PI)
            for mu, sd, w in zip(mixture.means, mixture.stddevs, mixture.weights)
        ]

    def log_density(self, x):
        vals = [c - 0.5 * ((x - mu) * inv) ** 2 for mu, inv, c in self._terms]
        top = max(vals)
        return top + math.log(math.fsum(math.exp(v - top) for v in vals))


class UniformWalkProposal(Proposal):
    """theta' ~ U(theta - delta, theta + delta)."""

    symmetric = True

    def __init__(self, delta: float = 1.0):
        if not delta > 0:
            raise ValueError("delta must be positive")
        self.delta = float(delta)

    def sample(self, current, rng):
        return current + self.delta * (2.0 * rng.random() - 1.0)

    def log_density(self, current, proposed):
        return -math.log(2 * self.delta) if abs(proposed - current) < self.delta else -math.inf

    def __repr__(self):
        return f"UniformWalkProposal(delta={self.delta})"


def mode_regions(m: GaussianMixture, lo: float | None = None, hi: float | None = None, grid: int = 200_001):
    """Partition the line into basins of attraction of the density's modes.

    Returns a list of ``(left, right, mode_location)`` with boundaries at the
    local minima of the density between neighbouring modes; the outer
    boundaries are -inf and +inf.
    """
    span = [mu + s * sd for mu, sd in zip(m.means, m.stddevs) for s in (-8, 8)]
    lo = min(span) if lo is None else lo
    hi = max(span) if hi is None else hi
    x = np.linspace(lo, hi, grid)
    f = mixture_log_density(m, x)
    d = np.diff(f)
    peaks = [i for i in range(1, len(d)) if d[i - 1] > 0 and d[i] <= 0]
    troughs = [i for i in range(1, len(d)) if d[i - 1] < 0 and d[i] >= 0]
    bounds = [-math.inf] + [float(x[i]) for i in troughs] + [math.inf]
    return [(bounds[k], bounds[k + 1], float(x[p])) for k, p in enumerate(peaks)]
