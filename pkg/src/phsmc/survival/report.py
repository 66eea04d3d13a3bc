"""Summaries of a sampled sequence of trees, plus a synthetic data generator."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .data import Column, SurvivalDataset
from .tree import Node, covariates_used

__all__ = ["covariate_inclusion", "modal_tree", "simulate_survival_data"]


def covariate_inclusion(trees: Sequence[Node], n_covariates: int) -> np.ndarray:
    """Fraction of sampled trees that split on each covariate."""
    if not trees:
        raise ValueError("empty trace")
    counts = np.zeros(n_covariates)
    seen: dict = {}
    for t in trees:
        used = seen.get(t.key)
        if used is None:
            used = seen[t.key] = tuple(covariates_used(t))
        for j in used:
            counts[j] += 1
    return counts / len(trees)


def modal_tree(trees: Sequence[Node], log_marginals: Sequence[float]) -> tuple[Node, float, int]:
    """Highest-scoring tree; ties go to the earliest iteration.

    Returns ``(tree, log_marginal, iteration)``.
    """
    lm = np.asarray(log_marginals, dtype=float)
    if len(lm) == 0:
        raise ValueError("empty trace")
    i = int(np.argmax(lm))  # first occurrence of the maximum
    return trees[i], float(lm[i]), i


def simulate_survival_data(
    n: int,
    seed: int,
    shape: float = 1.5,
    censor_rate: float = 0.2,
    effects: bool = True,
) -> SurvivalDataset:
    """Liver-like synthetic data: one continuous, one ordinal, one categorical covariate.

    With ``effects`` the Weibull scale depends on the continuous and the
    categorical covariate; otherwise all units are exchangeable.
    Times are in months.
    """
    rng = np.random.default_rng(seed)
    size = rng.uniform(1, 20, n).round(1)
    count = rng.integers(1, 6, n).astype(float)
    site = rng.integers(0, 2, n).astype(float)
    scale = np.full(n, 30.0)
    if effects:
        scale = np.where(size > 10, 12.0, 36.0) * np.where(site == 1, 0.6, 1.0)
    t = scale * rng.weibull(shape, n)
    t = np.maximum(t, 0.1).round(2)
    c = rng.uniform(0, 1, n) < censor_rate
    # censored units are observed at a uniform fraction of their event time
    t = np.where(c, np.maximum(t * rng.uniform(0.2, 1.0, n), 0.05).round(2), t)
    cols = [Column("SIZE", "continuous"), Column("COUNT", "ordinal"), Column("SITE", "categorical", ("colon", "rectum"))]
    return SurvivalDataset(t, (~c).astype(int), np.column_stack([size, count, site]), cols)

