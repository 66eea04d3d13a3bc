"""Bayesian survival trees with Weibull leaves."""
from .data import LIVER_SCHEMA, Column, SurvivalDataError, SurvivalDataset, ingest_survival_csv, load_schema, write_survival_csv
from .km import kaplan_meier, leaf_km_table, read_km_table, write_km_table
from .laplace import (
    ImproperLeafError,
    LaplaceError,
    LeafStats,
    leaf_d1,
    leaf_d2,
    leaf_eta_hat,
    leaf_log_evidence,
    leaf_log_integrand,
    leaf_stats,
)
from .moves import CrossChainMove, TreeMoveProposal, cross_chain_move, propose_cross_chain_move, propose_within_chain_move
from .report import covariate_inclusion, modal_tree, simulate_survival_data
from .target import SurvivalTreeTarget, tree_log_marginal
from .tree import LEAF, Node, Rule, RuleSpace, enumerate_trees, partition, split, tree_from_dict, tree_to_dict

__all__ = [
    "LIVER_SCHEMA",
    "Column",
    "SurvivalDataError",
    "SurvivalDataset",
    "ingest_survival_csv",
    "load_schema",
    "write_survival_csv",
    "kaplan_meier",
    "leaf_km_table",
    "read_km_table",
    "write_km_table",
    "ImproperLeafError",
    "LaplaceError",
    "LeafStats",
    "leaf_d1",
    "leaf_d2",
    "leaf_eta_hat",
    "leaf_log_evidence",
    "leaf_log_integrand",
    "leaf_stats",
    "CrossChainMove",
    "TreeMoveProposal",
    "cross_chain_move",
    "propose_cross_chain_move",
    "propose_within_chain_move",
    "covariate_inclusion",
    "modal_tree",
    "simulate_survival_data",
    "SurvivalTreeTarget",
    "tree_log_marginal",
    "LEAF",
    "Node",
    "Rule",
    "RuleSpace",
    "enumerate_trees",
    "partition",
    "split",
    "tree_from_dict",
    "tree_to_dict",
]
