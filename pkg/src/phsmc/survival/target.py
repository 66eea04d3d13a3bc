"""Laplace-approximated marginal posterior of a survival tree."""
from __future__ import annotations

import math

import numpy as np

from ..core import StateSpaceKind, TargetDistribution
from .data import SurvivalDataset
from .laplace import LaplaceError, is_proper, leaf_log_evidence, leaf_stats
from .tree import Node, partition

__all__ = ["SurvivalTreeTarget", "tree_log_marginal"]

_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def tree_log_marginal(tree: Node, data: SurvivalDataset, form: str = "exact") -> float:
    """Sum of per-leaf Laplace log evidences; -inf if any leaf is improper.

    Each leaf contributes log(2 pi)/2 + l(eta_hat) - log(-l2(eta_hat))/2.
    """
    total = 0.0
    for idx in partition(tree, data.covariates):
        s = leaf_stats(data.times[idx], data.events[idx])
        if not is_proper(s):
            return -math.inf
        try:
            total += leaf_log_evidence(s, form)
        except LaplaceError:
            return -math.inf
    return total


class SurvivalTreeTarget(TargetDistribution):
    """Uniform prior over trees with at most ``b_max`` leaves times the
    Laplace-approximated evidence. Leaf and tree values are memoised."""

    kind = StateSpaceKind.TREE

    def __init__(self, data: SurvivalDataset, b_max: int = 30, form: str = "exact", cache_size: int = 200_000):
        self.data = data
        self.b_max = int(b_max)
        self.form = form
        self.cache_size = cache_size
        self._leaf_cache: dict[bytes, float] = {}
        self._tree_cache: dict = {}
        self.failed_leaves = 0

    def leaf_value(self, idx: np.ndarray) -> float:
        key = idx.tobytes()
        v = self._leaf_cache.get(key)
        if v is None:
            s = leaf_stats(self.data.times[idx], self.data.events[idx])
            if not is_proper(s):
                v = -math.inf
            else:
                try:
                    v = leaf_log_evidence(s, self.form)
                except LaplaceError:
                    self.failed_leaves += 1
                    v = -math.inf
            if len(self._leaf_cache) >= self.cache_size:
                self._leaf_cache.clear()
            self._leaf_cache[key] = v
        return v

    def log_density(self, tree: Node) -> float:
        if tree.n_leaves > self.b_max:
            return -math.inf
        key = tree.key
        v = self._tree_cache.get(key)
        if v is not None:
            return v
        v = 0.0
        for idx in partition(tree, self.data.covariates):
            lv = self.leaf_value(idx)
            if lv == -math.inf:
                v = -math.inf
                break
            v += lv
        if len(self._tree_cache) >= self.cache_size:
            self._tree_cache.clear()
        self._tree_cache[key] = v
        return v

    def is_valid(self, tree: Node) -> bool:
        return math.isfinite(self.log_density(tree))
