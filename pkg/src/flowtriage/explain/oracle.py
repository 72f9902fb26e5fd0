"""Exhaustive Shapley oracle for verifying the TreeSHAP kernels.

Enumerates feature coalitions directly against the same path-dependent value
function (instance branch for features in the coalition, cover-weighted
average otherwise). Exponential cost, so capped at 15 features; features a
tree never splits on are null players and get phi = 0 without enumeration.
"""

from math import factorial

import numpy as np

from ..trees import LEAF, Tree, TreeEnsemble
from . import Explanation

MAX_FEATURES = 15


def coalition_value(tree: Tree, x, in_coalition) -> float:
    """Descend the tree: instance branch for coalition features, cover-weighted
    average over both branches for the rest."""

    def rec(node: int) -> float:
        f = int(tree.feature_index[node])
        if f == LEAF:
            return float(tree.leaf_value[node])
        left, right = int(tree.left[node]), int(tree.right[node])
        if in_coalition(f):
            return rec(left if x[f] < tree.threshold[node] else right)
        total = tree.cover[node]
        return (tree.cover[left] * rec(left) + tree.cover[right] * rec(right)) / total

    return rec(0)


def _tree_shapley(tree: Tree, x, n_features: int) -> np.ndarray:
    phi = np.zeros(n_features)
    used = sorted(tree.used_features())
    m = len(used)
    if m == 0:
        return phi
    pos = {f: i for i, f in enumerate(used)}
    values = np.empty(1 << m)
    for mask in range(1 << m):
        values[mask] = coalition_value(tree, x, lambda f, mask=mask: bool(mask >> pos[f] & 1))
    fact = [factorial(i) for i in range(m + 1)]
    for j, f in enumerate(used):
        bit = 1 << j
        total = 0.0
        for mask in range(1 << m):
            if mask & bit:
                continue
            s = bin(mask).count("1")
            weight = fact[s] * fact[m - s - 1] / fact[m]
            total += weight * (values[mask | bit] - values[mask])
        phi[f] = total
    return phi


def brute_force_shapley(model, x) -> Explanation:
    """Exact Shapley values for a tree or ensemble by coalition enumeration.

    Null players outside a tree are dropped from its enumeration, which
    leaves all other Shapley values unchanged.
    """
    x = np.asarray(x, dtype=np.float64)
    if isinstance(model, Tree):
        model = TreeEnsemble([model], "single_tree", [f"f{i}" for i in range(len(x))])
    n = model.n_features
    if n > MAX_FEATURES:
        raise ValueError(f"oracle limited to {MAX_FEATURES} features, got {n}")
    scale = model.tree_scale()
    phi = np.zeros(n)
    base = model.base_score
    for tree in model.trees:
        phi += scale * _tree_shapley(tree, x, n)
        base += scale * tree.expected_value()
    return Explanation(list(model.feature_names), phi, float(base))
