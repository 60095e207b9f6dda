"""Transparent CART regression tree whose local explanations are exact."""

from xaistab.tree.criteria import CRITERIA, impurity
from xaistab.tree.model import (
    MAX_FEATURES,
    SPLITTERS,
    RegressionTree,
    TreeNode,
    TreeParams,
    check_tree,
    explain_local,
    fit,
    predict,
)

__all__ = [
    "CRITERIA",
    "MAX_FEATURES",
    "RegressionTree",
    "SPLITTERS",
    "TreeNode",
    "TreeParams",
    "check_tree",
    "explain_local",
    "fit",
    "impurity",
    "predict",
]
