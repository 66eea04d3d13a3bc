"""Within-chain and cross-chain tree moves.

Within-chain moves (drawn uniformly among those applicable to the current
number of leaves b):

* insert  -- b < b_max: split a uniformly chosen leaf with a rule from the
  rule proposal.
* delete  -- b >= 2: collapse a uniformly chosen node whose children are both
  leaves. Exact inverse of insert.
* change  -- b >= 2: redraw the rule of a uniformly chosen split, conditioned
  on differing from the current one.
* permute -- b >= 3: pick k uniformly in 2..(b-1), k splits uniformly, and a
  uniformly random non-identity permutation of their rules. Symmetric.
* graft   -- b >= 3: pick a branch whose sibling is a leaf, prune it together
  with its parent split (the parent becomes a leaf), and re-attach parent
  rule plus branch at another leaf. Rules are unchanged. The proposal ratio
  is computed by enumerating every (branch, leaf) pair, since distinct pairs
  can produce the same tree.

Each move returns the log proposal ratio log q(T'->T) - log q(T->T').
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..core import Proposal
from .tree import LEAF, Node, RuleSpace, get_node, internal_paths, iter_nodes, leaf_paths, replace_at

__all__ = [
    "MOVES",
    "applicable_moves",
    "propose_within_chain_move",
    "TreeMoveProposal",
    "CROSS_MOVES",
    "cross_chain_move",
    "propose_cross_chain_move",
    "CrossChainMove",
]

MOVES = ("insert", "delete", "change", "permute", "graft")
CROSS_MOVES = ("swap", "insert", "graft", "change")


def applicable_moves(tree: Node, b_max: int, space: RuleSpace) -> list[str]:
    b = tree.n_leaves
    out = []
    if b < b_max:
        out.append("insert")
    if b >= 2:
        out.append("delete")
        if space.n_rules >= 2:
            out.append("change")
    if b >= 3:
        out.append("permute")
        out.append("graft")
    return out


def _cherries(tree: Node) -> list[tuple]:
    return [p for p, n in iter_nodes(tree) if not n.is_leaf and n.left.is_leaf and n.right.is_leaf]


def _graft_branches(tree: Node) -> list[tuple]:
    """Non-root paths whose sibling is a leaf and that leave a regraft target."""
    b = tree.n_leaves
    out = []
    for p, n in iter_nodes(tree):
        if n.is_leaf:
            continue
        if n.right.is_leaf and b - n.left.n_leaves >= 2:
            out.append(p + (0,))
        if n.left.is_leaf and b - n.right.n_leaves >= 2:
            out.append(p + (1,))
    return out


def _graft_results(tree: Node):
    """Every graft outcome with its probability given that graft was chosen."""
    branches = _graft_branches(tree)
    for v in branches:
        parent_path, side = v[:-1], v[-1]
        parent = get_node(tree, parent_path)
        branch = get_node(tree, v)
        pruned = replace_at(tree, parent_path, LEAF)
        targets = [p for p in leaf_paths(pruned) if p != parent_path]
        w = 1.0 / (len(branches) * len(targets))
        new = Node(parent.rule, branch, LEAF) if side == 0 else Node(parent.rule, LEAF, branch)
        for leaf in targets:
            yield w, replace_at(pruned, leaf, new)


def _graft_log_q(tree: Node, result_key) -> float:
    """log probability that a graft on ``tree`` yields the tree with ``result_key``."""
    total = sum(w for w, t in _graft_results(tree) if t.key == result_key)
    return math.log(total) if total > 0 else -math.inf


def propose_within_chain_move(tree: Node, space: RuleSpace, b_max: int, rng: np.random.Generator):
    """Draw one of the five within-chain moves.

    Returns ``(new_tree, log_proposal_ratio, move_name)``.
    """
    moves = applicable_moves(tree, b_max, space)
    if not moves:
        raise RuntimeError("no applicable tree move")
    move = moves[int(rng.integers(len(moves)))]
    b = tree.n_leaves

    if move == "insert":
        leaves = leaf_paths(tree)
        path = leaves[int(rng.integers(len(leaves)))]
        rule = space.sample(rng)
        new = replace_at(tree, path, Node(rule, LEAF, LEAF))
        fwd = -math.log(len(moves)) - math.log(b) + space.log_prob(rule)
        rev = -math.log(len(applicable_moves(new, b_max, space))) - math.log(len(_cherries(new)))
        return new, rev - fwd, move

    if move == "delete":
        cherries = _cherries(tree)
        path = cherries[int(rng.integers(len(cherries)))]
        rule = get_node(tree, path).rule
        new = replace_at(tree, path, LEAF)
        fwd = -math.log(len(moves)) - math.log(len(cherries))
        rev = -math.log(len(applicable_moves(new, b_max, space))) - math.log(new.n_leaves) + space.log_prob(rule)
        return new, rev - fwd, move

    if move == "change":
        internal = internal_paths(tree)
        path = internal[int(rng.integers(len(internal)))]
        node = get_node(tree, path)
        old = node.rule
        while True:
            rule = space.sample(rng)
            if rule != old:
                break
        new = replace_at(tree, path, Node(rule, node.left, node.right))
        p_old, p_new = space.prob(old), space.prob(rule)
        if p_old == 0:
            return new, -math.inf, move
        # log [p(old)/(1-p(new))] - log [p(new)/(1-p(old))]
        ratio = math.log(p_old) - math.log1p(-p_new) - math.log(p_new) + math.log1p(-p_old)
        return new, ratio, move

    if move == "permute":
        internal = internal_paths(tree)
        k = int(rng.integers(2, len(internal) + 1))
        chosen = rng.choice(len(internal), size=k, replace=False)
        while True:
            perm = rng.permutation(k)
            if np.any(perm != np.arange(k)):
                break
        rules = [get_node(tree, internal[i]).rule for i in chosen]
        new = tree
        for slot, src in zip(chosen, perm):
            node = get_node(new, internal[slot])
            new = replace_at(new, internal[slot], Node(rules[src], node.left, node.right))
        return new, 0.0, move

    # graft
    branches = _graft_branches(tree)
    v = branches[int(rng.integers(len(branches)))]
    parent_path, side = v[:-1], v[-1]
    parent = get_node(tree, parent_path)
    branch = get_node(tree, v)
    pruned = replace_at(tree, parent_path, LEAF)
    targets = [p for p in leaf_paths(pruned) if p != parent_path]
    leaf = targets[int(rng.integers(len(targets)))]
    graft = Node(parent.rule, branch, LEAF) if side == 0 else Node(parent.rule, LEAF, branch)
    new = replace_at(pruned, leaf, graft)
    ratio = _graft_log_q(new, tree.key) - _graft_log_q(tree, new.key)
    return new, ratio, move


class TreeMoveProposal(Proposal):
    """The within-chain move mixture as an MH proposal; tracks move counts."""

    def __init__(self, space: RuleSpace, b_max: int = 30):
        self.space = space
        self.b_max = int(b_max)
        self.counts = {m: 0 for m in MOVES}

    def sample(self, current, rng):
        return self.propose(current, rng)[0]

    def propose(self, current, rng):
        new, ratio, move = propose_within_chain_move(current, self.space, self.b_max, rng)
        self.counts[move] += 1
        return new, ratio


def _paths_in_both(a: Node, b: Node, pred) -> list[tuple]:
    pb = dict(iter_nodes(b))
    return [p for p, na in iter_nodes(a) if p in pb and pred(na, pb[p])]


def _is_cherry(n: Node) -> bool:
    return not n.is_leaf and n.left.is_leaf and n.right.is_leaf


def cross_chain_move(
    a: Node,
    b: Node,
    rng: np.random.Generator,
    is_valid: Callable[[Node], bool] | None = None,
    moves=CROSS_MOVES,
) -> tuple[Node, Node, str]:
    """Exchange material between two trees; always accepted.

    * swap   -- exchange the whole trees.
    * change -- at a path that is a split in both, exchange the two rules.
    * graft  -- at a non-root path present in both, exchange the subtrees.
    * insert -- at a path that is a leaf in one tree and a two-leaf split in
      the other, move the split across.

    When the chosen structured move has no eligible location, or produces a
    tree rejected by ``is_valid``, the whole trees are swapped instead.
    Returns ``(new_a, new_b, move_used)``.
    """
    move = moves[int(rng.integers(len(moves)))]
    if move == "swap":
        return b, a, "swap"
    if move == "change":
        paths = _paths_in_both(a, b, lambda x, y: not x.is_leaf and not y.is_leaf)
    elif move == "graft":
        paths = [p for p in _paths_in_both(a, b, lambda x, y: True) if p]
    else:
        paths = _paths_in_both(
            a, b, lambda x, y: (x.is_leaf and _is_cherry(y)) or (y.is_leaf and _is_cherry(x))
        )
    if not paths:
        return b, a, "swap"
    path = paths[int(rng.integers(len(paths)))]
    na, nb = get_node(a, path), get_node(b, path)
    if move == "change":
        new_a = replace_at(a, path, Node(nb.rule, na.left, na.right))
        new_b = replace_at(b, path, Node(na.rule, nb.left, nb.right))
    else:
        new_a = replace_at(a, path, nb)
        new_b = replace_at(b, path, na)
    if is_valid is not None and not (is_valid(new_a) and is_valid(new_b)):
        return b, a, "swap"
    return new_a, new_b, move


def propose_cross_chain_move(trees: list[Node], m: int, rng: np.random.Generator, is_valid=None, moves=CROSS_MOVES):
    """Apply a cross-chain move between chain 1 (index 0) and chain ``m``.

    Returns a new list of trees and the move used.
    """
    if not 1 <= m < len(trees):
        raise IndexError("partner chain must be one of 2..M")
    out = list(trees)
    out[0], out[m], used = cross_chain_move(trees[0], trees[m], rng, is_valid, moves)
    return out, used


class CrossChainMove:
    """Callable for ``run_phs(cross_move=...)``; counts move usage."""

    def __init__(self, is_valid=None, moves=CROSS_MOVES):
        self.is_valid = is_valid
        self.moves = tuple(moves)
        self.counts = {m: 0 for m in CROSS_MOVES}

    def __call__(self, a, b, rng):
        new_a, new_b, used = cross_chain_move(a, b, rng, self.is_valid, self.moves)
        self.counts[used] += 1
        return new_a, new_b
