"""Finite state spaces: discrete targets, matrix proposals and exact kernels.

The kernel builders assemble transition matrices straight from the
acceptance formulas, without running any sampler, so they serve as exact
oracles for the simulated chains.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .core import Proposal, StateSpaceKind, TargetDistribution

__all__ = [
    "DiscreteTarget",
    "MatrixProposal",
    "mh_kernel_matrix",
    "swap_permutation",
    "pt_joint_kernel",
    "phs_joint_kernel",
    "stationary_distribution",
    "product_measure",
    "joint_states",
]


class DiscreteTarget(TargetDistribution):
    """Log mass on states ``0..n-1``."""

    kind = StateSpaceKind.DISCRETE

    def __init__(self, log_mass):
        self.log_mass = np.asarray(log_mass, dtype=float)

    @property
    def n_states(self) -> int:
        return len(self.log_mass)

    def log_density(self, state):
        return float(self.log_mass[state])

    def probabilities(self, temperature: float = 1.0) -> np.ndarray:
        w = self.log_mass / temperature
        w = np.exp(w - w.max())
        return w / w.sum()


class MatrixProposal(Proposal):
    """Row-stochastic proposal matrix with zero diagonal."""

    def __init__(self, q):
        q = np.asarray(q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("proposal matrix must be square")
        if np.any(np.diag(q) != 0):
            raise ValueError("proposal must put zero mass on the current state")
        if not np.allclose(q.sum(axis=1), 1.0):
            raise ValueError("proposal rows must sum to one")
        self.q = q
        self._cum = np.cumsum(q, axis=1)
        self.symmetric = bool(np.allclose(q, q.T, rtol=0, atol=0))

    def sample(self, current, rng):
        u = rng.random()
        j = int(np.searchsorted(self._cum[current], u, side="right"))
        return min(j, self.q.shape[0] - 1)

    def log_density(self, current, proposed):
        p = self.q[current, proposed]
        return math.log(p) if p > 0 else -math.inf


def mh_kernel_matrix(log_mass, q, temperature: float = 1.0) -> np.ndarray:
    """K(a,b) = q(b|a) * min(1, f(b) q(a|b) / (f(a) q(b|a))), diagonal fills the rest."""
    lf = np.asarray(log_mass, dtype=float) / temperature
    q = np.asarray(q, dtype=float)
    n = len(lf)
    k = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            if a == b or q[a, b] == 0:
                continue
            log_r = lf[b] - lf[a] + (math.log(q[b, a]) if q[b, a] > 0 else -math.inf) - math.log(q[a, b])
            k[a, b] = q[a, b] * min(1.0, math.exp(min(log_r, 0.0)))
        k[a, a] = 1.0 - k[a].sum()
    return k


def joint_states(n: int, m: int) -> list[tuple[int, ...]]:
    """Joint states in the ordering used by ``np.kron`` (chain 0 most significant)."""
    return list(itertools.product(range(n), repeat=m))


def _index(state: tuple[int, ...], n: int) -> int:
    idx = 0
    for s in state:
        idx = idx * n + s
    return idx


def swap_permutation(n: int, m: int, j: int, k: int) -> np.ndarray:
    """0/1 matrix exchanging the values of chains ``j`` and ``k``."""
    size = n**m
    p = np.zeros((size, size))
    for st in joint_states(n, m):
        new = list(st)
        new[j], new[k] = new[k], new[j]
        p[_index(st, n), _index(tuple(new), n)] = 1.0
    return p


def _kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1))
    for a in mats:
        out = np.kron(out, a)
    return out


def pt_joint_kernel(log_mass, q, temperatures, swap_rate: float) -> np.ndarray:
    """Joint parallel-tempering kernel with independent swap proposals.

    With probability ``1 - swap_rate`` every chain takes one MH step against
    its heated target; otherwise an ordered pair (j, k), j != k, is drawn
    uniformly and the exchange is accepted with the tempered swap ratio.
    """
    lf = np.asarray(log_mass, dtype=float)
    n = len(lf)
    temps = list(temperatures)
    m = len(temps)
    update = _kron_all([mh_kernel_matrix(lf, q, t) for t in temps])
    if m < 2:
        return update
    states = joint_states(n, m)
    swap = np.zeros_like(update)
    w = 1.0 / (m * (m - 1))
    for j in range(m):
        for k in range(m):
            if j == k:
                continue
            for st in states:
                a = _index(st, n)
                log_r = (1 / temps[j] - 1 / temps[k]) * (lf[st[k]] - lf[st[j]])
                acc = math.exp(min(0.0, log_r))
                new = list(st)
                new[j], new[k] = new[k], new[j]
                b = _index(tuple(new), n)
                swap[a, b] += w * acc
                swap[a, a] += w * (1 - acc)
    return (1 - swap_rate) * update + swap_rate * swap


def phs_joint_kernel(log_mass, q, n_chains: int, proposals=None) -> np.ndarray:
    """Joint kernel of the parallel hierarchical sampler.

    For each m in 2..M (prob 1/(M-1)): exchange chains 1 and m, then take one
    MH step on every chain other than 1 and m. ``proposals`` optionally gives
    a different proposal matrix per chain.
    """
    lf = np.asarray(log_mass, dtype=float)
    n = len(lf)
    if n_chains < 3:
        raise ValueError("PHS needs at least three chains")
    qs = proposals if proposals is not None else [q] * n_chains
    mh = [mh_kernel_matrix(lf, qq) for qq in qs]
    eye = np.eye(n)
    total = np.zeros((n**n_chains, n**n_chains))
    for m in range(1, n_chains):
        upd = _kron_all([eye if c in (0, m) else mh[c] for c in range(n_chains)])
        total += swap_permutation(n, n_chains, 0, m) @ upd
    return total / (n_chains - 1)


def product_measure(marginals) -> np.ndarray:
    return _kron_all([np.asarray(p, dtype=float)[None, :] for p in marginals]).ravel()


def stationary_distribution(k: np.ndarray) -> np.ndarray:
    """Left Perron vector of a stochastic matrix, normalised to sum one."""
    n = k.shape[0]
    a = np.vstack([k.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return pi
