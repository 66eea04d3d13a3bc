import numpy as np
import pytest

from phsmc.survival import Column, SurvivalDataset


def small_tree_data() -> SurvivalDataset:
    """12 units, an ordinal covariate with four levels and a three-level categorical one."""
    a = np.repeat([1.0, 2.0, 3.0, 4.0], 3)
    b = np.tile([0.0, 1.0, 2.0], 4)
    t = np.array([2.1, 3.4, 5.0, 4.2, 6.3, 1.7, 8.8, 2.9, 7.5, 12.4, 3.8, 9.6])
    e = np.array([1, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1, 0])
    cols = [Column("A", "ordinal"), Column("B", "categorical", ("x", "y", "z"))]
    return SurvivalDataset(t, e, np.column_stack([a, b]), cols)


@pytest.fixture
def tree_data() -> SurvivalDataset:
    return small_tree_data()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def write_liver_like_csv(path, n: int = 622, seed: int = 0) -> None:
    """Synthetic file with the liver-metastases column layout (not real data)."""
    rng = np.random.default_rng(seed)
    dlm = rng.uniform(0.5, 15, n).round(1)
    nlm = rng.integers(1, 9, n)
    scale = np.where(dlm > 5, 20.0, 45.0) * np.where(nlm > 3, 0.6, 1.0)
    t = np.maximum(scale * rng.weibull(1.3, n), 0.1).round(1)
    e = (rng.uniform(size=n) < 0.8).astype(int)
    cats = {
        "TD": ["sync", "meta"],
        "SEX": ["F", "M"],
        "LI": ["uni", "bi"],
        "LRD": ["no", "yes"],
        "TNM": ["I", "II", "III", "IV"],
        "LOC": ["colon", "rectum", "sigma"],
    }
    cols = {"time": t, "event": e, "DLM": dlm, "AGE": rng.integers(35, 85, n), "NLM": nlm}
    for k, levels in cats.items():
        cols[k] = np.array(levels)[rng.integers(0, len(levels), n)]
    order = ["time", "event", "DLM", "AGE", "TD", "SEX", "LI", "NLM", "LRD", "TNM", "LOC"]
    with open(path, "w") as fh:
        fh.write(",".join(order) + "\n")
        for i in range(n):
            fh.write(",".join(str(cols[c][i]) for c in order) + "\n")
