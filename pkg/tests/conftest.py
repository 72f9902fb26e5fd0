import numpy as np
import pytest

from flowtriage.data import FlowTable
from flowtriage.trees import LEAF, Tree, TreeEnsemble


def make_tree(nodes):
    """Build a Tree from a list of dicts; leaves give {'value', 'cover'},
    internal nodes {'feature', 'threshold', 'left', 'right', 'cover'}."""
    n = len(nodes)
    t = Tree(
        feature_index=np.full(n, LEAF, dtype=np.int32),
        threshold=np.zeros(n),
        left=np.full(n, -1, dtype=np.int32),
        right=np.full(n, -1, dtype=np.int32),
        leaf_value=np.zeros(n),
        cover=np.zeros(n),
    )
    for i, node in enumerate(nodes):
        t.cover[i] = node["cover"]
        if "feature" in node:
            t.feature_index[i] = node["feature"]
            t.threshold[i] = node["threshold"]
            t.left[i] = node["left"]
            t.right[i] = node["right"]
        else:
            t.leaf_value[i] = node["value"]
    return t


def stump(feature, threshold, left_value, right_value, left_cover=1.0, right_cover=1.0):
    return make_tree([
        {"feature": feature, "threshold": threshold, "left": 1, "right": 2,
         "cover": left_cover + right_cover},
        {"value": left_value, "cover": left_cover},
        {"value": right_value, "cover": right_cover},
    ])


def random_tree(rng, n_features, max_depth, split_prob=0.75):
    """Random tree with consistent covers (internal = sum of children)."""
    nodes = []

    def grow(depth):
        idx = len(nodes)
        nodes.append(None)
        if depth < max_depth and rng.random() < split_prob:
            f = int(rng.integers(0, n_features))
            t = float(rng.uniform(-1.0, 1.0))
            left = grow(depth + 1)
            right = grow(depth + 1)
            nodes[idx] = {"feature": f, "threshold": t, "left": left, "right": right,
                          "cover": nodes[left]["cover"] + nodes[right]["cover"]}
        else:
            nodes[idx] = {"value": float(rng.normal()), "cover": float(rng.uniform(0.5, 3.0))}
        return idx

    grow(0)
    return make_tree(nodes)


def blob_table(n=600, n_features=4, separation=2.0, seed=0):
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([
        rng.normal(-separation / 2, 1.0, size=(half, n_features)),
        rng.normal(separation / 2, 1.0, size=(n - half, n_features)),
    ])
    y = np.concatenate([np.zeros(half, dtype=int), np.ones(n - half, dtype=int)])
    perm = rng.permutation(n)
    return FlowTable([f"f{i}" for i in range(n_features)], X[perm], y[perm],
                     np.arange(n))


@pytest.fixture
def blobs():
    return blob_table()


def single_tree_model(tree, n_features, names=None):
    return TreeEnsemble([tree], "single_tree",
                        names or [f"f{i}" for i in range(n_features)])
