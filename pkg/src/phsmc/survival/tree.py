"""Binary partition trees over typed covariates.

Trees are immutable. A node is either the shared ``LEAF`` or a split with a
rule and two children; every edit rebuilds only the path from the root.
Nodes are addressed by paths: tuples of 0 (left, rule satisfied) and 1
(right).
"""
from __future__ import annotations

import itertools
import math
from typing import Iterator

import numpy as np

from .data import SurvivalDataset

__all__ = [
    "Rule",
    "Node",
    "LEAF",
    "split",
    "iter_nodes",
    "leaf_paths",
    "internal_paths",
    "get_node",
    "replace_at",
    "partition",
    "covariates_used",
    "RuleSpace",
    "enumerate_trees",
    "tree_to_dict",
    "tree_from_dict",
]


class Rule:
    """``x[covariate] <= threshold`` or ``x[covariate] in subset`` sends a unit left."""

    __slots__ = ("covariate", "threshold", "subset", "key")

    def __init__(self, covariate: int, threshold: float | None = None, subset=None):
        if (threshold is None) == (subset is None):
            raise ValueError("a rule needs exactly one of threshold or subset")
        self.covariate = int(covariate)
        self.threshold = None if threshold is None else float(threshold)
        self.subset = None if subset is None else frozenset(int(c) for c in subset)
        self.key = (self.covariate, self.threshold) if subset is None else (self.covariate, tuple(sorted(self.subset)))

    def goes_left(self, column: np.ndarray) -> np.ndarray:
        if self.threshold is not None:
            return column <= self.threshold
        return np.isin(column.astype(np.int64), list(self.subset))

    def complement(self, categories: int) -> "Rule":
        if self.subset is None:
            raise ValueError("only subset rules have a complement")
        return Rule(self.covariate, subset=set(range(categories)) - self.subset)

    def __eq__(self, other):
        return isinstance(other, Rule) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        if self.threshold is not None:
            return f"Rule(x{self.covariate} <= {self.threshold:g})"
        return f"Rule(x{self.covariate} in {sorted(self.subset)})"


class Node:
    __slots__ = ("rule", "left", "right", "n_leaves", "key")

    def __init__(self, rule: Rule | None = None, left: "Node | None" = None, right: "Node | None" = None):
        self.rule = rule
        self.left = left
        self.right = right
        if rule is None:
            self.n_leaves = 1
            self.key = None
        else:
            self.n_leaves = left.n_leaves + right.n_leaves
            self.key = (rule.key, left.key, right.key)

    @property
    def is_leaf(self) -> bool:
        return self.rule is None

    @property
    def n_internal(self) -> int:
        return self.n_leaves - 1

    def __eq__(self, other):
        return isinstance(other, Node) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        if self.is_leaf:
            return "LEAF"
        return f"({self.rule!r} {self.left!r} {self.right!r})"


LEAF = Node()


def split(rule: Rule, left: Node = LEAF, right: Node = LEAF) -> Node:
    return Node(rule, left, right)


def iter_nodes(tree: Node, path: tuple = ()) -> Iterator[tuple[tuple, Node]]:
    """Pre-order walk yielding ``(path, node)``."""
    stack = [(path, tree)]
    while stack:
        p, node = stack.pop()
        yield p, node
        if not node.is_leaf:
            stack.append((p + (1,), node.right))
            stack.append((p + (0,), node.left))


def leaf_paths(tree: Node) -> list[tuple]:
    """Leaf paths in left-to-right order."""
    return [p for p, n in iter_nodes(tree) if n.is_leaf]


def internal_paths(tree: Node) -> list[tuple]:
    return [p for p, n in iter_nodes(tree) if not n.is_leaf]


def get_node(tree: Node, path) -> Node:
    node = tree
    for step in path:
        node = node.right if step else node.left
    return node


def replace_at(tree: Node, path, new: Node) -> Node:
    if not path:
        return new
    step, rest = path[0], path[1:]
    if step:
        return Node(tree.rule, tree.left, replace_at(tree.right, rest, new))
    return Node(tree.rule, replace_at(tree.left, rest, new), tree.right)


def partition(tree: Node, covariates: np.ndarray, idx: np.ndarray | None = None) -> list[np.ndarray]:
    """Row indices falling in each leaf, leaves in left-to-right order."""
    if idx is None:
        idx = np.arange(covariates.shape[0])
    if tree.is_leaf:
        return [idx]
    left = tree.rule.goes_left(covariates[idx, tree.rule.covariate])
    return partition(tree.left, covariates, idx[left]) + partition(tree.right, covariates, idx[~left])


def covariates_used(tree: Node) -> set[int]:
    return {n.rule.covariate for _, n in iter_nodes(tree) if not n.is_leaf}


class RuleSpace:
    """Finite set of candidate splitting rules and the proposal over it.

    A rule is drawn by picking a covariate uniformly (among those with at
    least one rule), then a rule of that covariate uniformly. Continuous and
    ordinal covariates split at midpoints of consecutive distinct observed
    values; categorical covariates split on proper non-empty subsets of the
    observed categories, one representative (the one holding the smallest
    code) per complementary pair.
    """

    MAX_CATEGORIES = 16

    def __init__(self, data: SurvivalDataset):
        self.rules: list[list[Rule]] = []
        for j, col in enumerate(data.columns):
            vals = np.unique(data.covariates[:, j])
            if col.is_categorical:
                codes = [int(v) for v in vals]
                if len(codes) > self.MAX_CATEGORIES:
                    raise ValueError(f"{col.name}: too many categories for subset rules")
                first, rest = codes[0], codes[1:]
                rules = []
                for r in range(0, len(rest)):
                    for combo in itertools.combinations(rest, r):
                        rules.append(Rule(j, subset=(first,) + combo))
            else:
                mids = (vals[:-1] + vals[1:]) / 2.0
                rules = [Rule(j, threshold=float(m)) for m in mids]
            self.rules.append(rules)
        self.active = [j for j, r in enumerate(self.rules) if r]
        self._prob = {}
        for j in self.active:
            for r in self.rules[j]:
                self._prob[r.key] = 1.0 / (len(self.active) * len(self.rules[j]))

    @property
    def n_rules(self) -> int:
        return sum(len(r) for r in self.rules)

    def all_rules(self) -> list[Rule]:
        return [r for rs in self.rules for r in rs]

    def sample(self, rng: np.random.Generator) -> Rule:
        if not self.active:
            raise ValueError("no covariate admits a split")
        j = self.active[int(rng.integers(len(self.active)))]
        rs = self.rules[j]
        return rs[int(rng.integers(len(rs)))]

    def prob(self, rule: Rule) -> float:
        return self._prob.get(rule.key, 0.0)

    def log_prob(self, rule: Rule) -> float:
        p = self.prob(rule)
        return math.log(p) if p > 0 else -math.inf


def enumerate_trees(space: RuleSpace, max_leaves: int) -> list[Node]:
    """Every tree with at most ``max_leaves`` leaves built from ``space``."""
    rules = space.all_rules()
    by_size: dict[int, list[Node]] = {1: [LEAF]}
    for b in range(2, max_leaves + 1):
        out = []
        for k in range(1, b):
            for left in by_size[k]:
                for right in by_size[b - k]:
                    for r in rules:
                        out.append(Node(r, left, right))
        by_size[b] = out
    return [t for b in range(1, max_leaves + 1) for t in by_size[b]]


def tree_to_dict(tree: Node, data: SurvivalDataset | None = None) -> dict:
    """Nested JSON-able description; leaves carry ids 1..b left to right and sizes."""
    sizes = None
    if data is not None:
        sizes = [len(ix) for ix in partition(tree, data.covariates)]
    counter = itertools.count(1)

    def rec(node):
        if node.is_leaf:
            k = next(counter)
            out = {"leaf": k}
            if sizes is not None:
                out["size"] = sizes[k - 1]
            return out
        r = node.rule
        rule = {"covariate": r.covariate}
        if data is not None:
            col = data.columns[r.covariate]
            rule["name"] = col.name
        if r.threshold is not None:
            rule.update(kind="threshold", value=r.threshold)
        else:
            rule.update(kind="subset", codes=sorted(r.subset))
            if data is not None and data.columns[r.covariate].categories:
                cats = data.columns[r.covariate].categories
                rule["categories"] = [cats[c] for c in sorted(r.subset)]
        return {"rule": rule, "left": rec(node.left), "right": rec(node.right)}

    return rec(tree)


def tree_from_dict(d: dict) -> Node:
    if "rule" not in d:
        return LEAF
    r = d["rule"]
    if r["kind"] == "threshold":
        rule = Rule(r["covariate"], threshold=r["value"])
    else:
        rule = Rule(r["covariate"], subset=r["codes"])
    return Node(rule, tree_from_dict(d["left"]), tree_from_dict(d["right"]))
