"""Variable selection for Gaussian linear regression.

The model index ``gamma`` is a 0/1 vector over the p candidate covariates.
With a uniform prior over the 2^p models the unnormalised log posterior is

    -S/2 log(1 + n) - n/2 log(Y'Y - n/(n+1) Y'X_g (X_g'X_g)^-1 X_g'Y)

where S is the number of included covariates. The quadratic form is
evaluated through a Cholesky factor of X_g'X_g.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .core import ChainState, StateSpaceKind, TargetDistribution, _accept, mh_accept_log_ratio

__all__ = [
    "RegressionData",
    "log_marginal_posterior",
    "projection_term",
    "ModelSelectionTarget",
    "component_flip_proposal",
    "ComponentFlipSweep",
    "generate_dataset",
    "enumerate_exact_posterior",
    "ExactPosterior",
    "null_model",
    "read_regression_csv",
    "write_regression_csv",
]

SINGULAR_TOL = 1e-10


@dataclass(frozen=True)
class RegressionData:
    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[0] != y.shape[0]:
            raise ValueError("X and Y have different numbers of rows")
        n, p = x.shape
        if p < 1 or n <= p:
            raise ValueError(f"need n > p >= 1, got n={n}, p={p}")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise ValueError("non-finite values in the data")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def subset(self, columns) -> "RegressionData":
        return RegressionData(self.y, self.x[:, list(columns)])


class SingularModel(ArithmeticError):
    pass


def projection_term(xtx: np.ndarray, xty: np.ndarray) -> float:
    """Y'X (X'X)^-1 X'Y from the Gram matrix and X'Y, via Cholesky."""
    if xtx.shape[0] == 0:
        return 0.0
    diag = np.diag(xtx)
    try:
        chol = np.linalg.cholesky(xtx)
    except np.linalg.LinAlgError:
        raise SingularModel("Gram matrix is not positive definite") from None
    if np.min(np.diag(chol)) ** 2 < SINGULAR_TOL * np.max(diag):
        raise SingularModel("Cholesky pivot below tolerance")
    z = solve_triangular(chol, xty, lower=True)
    return float(z @ z)


def _log_post_from_parts(n: int, yty: float, size: int, proj: float) -> float:
    if proj < -1e-9 * yty or proj > yty * (1 + 1e-9):
        raise AssertionError(f"projection term {proj} outside [0, {yty}]")
    return -0.5 * size * math.log1p(n) - 0.5 * n * math.log(yty - n / (n + 1.0) * proj)


def log_marginal_posterior(data: RegressionData, gamma) -> float:
    """Unnormalised log posterior of model ``gamma``; -inf for singular models."""
    g = np.asarray(gamma).astype(bool)
    if g.shape != (data.p,):
        raise ValueError(f"gamma must have length {data.p}")
    yty = float(data.y @ data.y)
    xg = data.x[:, g]
    try:
        proj = projection_term(xg.T @ xg, xg.T @ data.y)
    except SingularModel:
        return -math.inf
    return _log_post_from_parts(data.n, yty, int(g.sum()), proj)


class ModelSelectionTarget(TargetDistribution):
    """Posterior over model indices with a per-model cache."""

    kind = StateSpaceKind.BINARY_VECTOR

    def __init__(self, data: RegressionData, cache: bool = True):
        self.data = data
        self._xtx = data.x.T @ data.x
        self._xty = data.x.T @ data.y
        self._yty = float(data.y @ data.y)
        self._cache: dict[bytes, float] | None = {} if cache else None
        self.singular_models: set[bytes] = set()

    @property
    def p(self) -> int:
        return self.data.p

    def log_density(self, gamma) -> float:
        g = np.asarray(gamma, dtype=np.uint8)
        key = g.tobytes()
        if self._cache is not None:
            hit = self._cache.get(key)
            if hit is not None:
                return hit
        idx = np.flatnonzero(g)
        try:
            proj = projection_term(self._xtx[np.ix_(idx, idx)], self._xty[idx])
            val = _log_post_from_parts(self.data.n, self._yty, len(idx), proj)
        except SingularModel:
            self.singular_models.add(key)
            val = -math.inf
        if self._cache is not None:
            self._cache[key] = val
        return val


def null_model(p: int) -> np.ndarray:
    return np.zeros(p, dtype=np.uint8)


def component_flip_proposal(gamma, rng: np.random.Generator, j: int | None = None) -> np.ndarray:
    """Copy of ``gamma`` with one coordinate flipped (uniform unless ``j`` given)."""
    g = np.array(gamma, dtype=np.uint8, copy=True)
    if j is None:
        j = int(rng.integers(len(g)))
    g[j] ^= 1
    return g


class ComponentFlipSweep:
    """Random-scan component-wise Metropolis sweep.

    Coordinates are visited in a fresh uniformly random order; at each one a
    single-bit flip is proposed and accepted by the MH rule. Flips are
    involutions, so the proposal is symmetric.
    """

    def update(self, target, current: ChainState, rng):
        p = len(current.value)
        order = rng.permutation(p)
        accepted = 0
        for j in order:
            cand = current.value.copy()
            cand[j] ^= 1
            lf = target.log_density(cand)
            ratio = mh_accept_log_ratio(target, None, current, cand, candidate_log_density=lf, log_q_ratio=0.0)
            if _accept(ratio, rng):
                current = ChainState(cand, lf)
                accepted += 1
        return current, accepted, p

    def __repr__(self):
        return "ComponentFlipSweep()"


def true_coefficients(p: int = 15) -> np.ndarray:
    return 2.0 * np.arange(1, p + 1) / 15.0


def generate_dataset(collinear: bool, seed: int, n: int = 180, p: int = 15, noise_var: float = 6.25):
    """Synthetic regression data with beta_j = 2j/15 and every covariate active.

    Independent design: X entries iid N(0, 1). Collinear design: columns
    X_j = Z_j + 2 Z_{p+1} with Z iid N(0, I_n). Y ~ N(X beta, noise_var I_n).

    Returns ``(data, true_gamma, true_beta)``.
    """
    rng = np.random.default_rng(seed)
    if collinear:
        z = rng.standard_normal((n, p + 1))
        x = z[:, :p] + 2.0 * z[:, [p]]
    else:
        x = rng.standard_normal((n, p))
    beta = true_coefficients(p)
    y = x @ beta + math.sqrt(noise_var) * rng.standard_normal(n)
    return RegressionData(y, x), np.ones(p, dtype=np.uint8), beta


@dataclass
class ExactPosterior:
    models: np.ndarray  # (2^p, p) uint8, row r is the binary expansion of r
    log_posterior: np.ndarray  # unnormalised
    probabilities: np.ndarray

    @property
    def inclusion_probabilities(self) -> np.ndarray:
        return self.probabilities @ self.models

    def top(self, k: int = 10):
        order = np.argsort(-self.probabilities, kind="stable")[:k]
        return [(self.models[i].copy(), float(self.probabilities[i])) for i in order]

    def rank_of(self, gamma) -> int:
        """0-based rank of a model by posterior probability."""
        g = np.asarray(gamma, dtype=np.uint8)
        idx = int(np.flatnonzero((self.models == g).all(axis=1))[0])
        return int(np.sum(self.probabilities > self.probabilities[idx]))


def enumerate_exact_posterior(data: RegressionData, p_max: int = 20) -> ExactPosterior:
    """Normalised posterior over all 2^p models by brute force."""
    p = data.p
    if p > p_max:
        raise ValueError(f"p = {p} exceeds the enumeration limit {p_max}")
    target = ModelSelectionTarget(data, cache=False)
    codes = np.arange(2**p)
    models = ((codes[:, None] >> np.arange(p)) & 1).astype(np.uint8)
    lp = np.array([target.log_density(m) for m in models])
    probs = np.exp(lp - logsumexp(lp))
    probs /= probs.sum()
    return ExactPosterior(models, lp, probs)


def write_regression_csv(path: str | Path, data: RegressionData) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y"] + [f"x{j + 1}" for j in range(data.p)])
        for yi, row in zip(data.y, data.x):
            w.writerow([repr(float(yi))] + [repr(float(v)) for v in row])


def read_regression_csv(path: str | Path) -> RegressionData:
    """CSV with a header row; the first column is Y, the rest are covariates."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    body = []
    for lineno, r in enumerate(rows[1:], start=2):
        try:
            body.append([float(v) for v in r])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric value") from None
    arr = np.array(body)
    return RegressionData(arr[:, 0], arr[:, 1:])
