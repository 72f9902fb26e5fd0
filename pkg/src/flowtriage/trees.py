"""Tree ensemble structures, prediction and JSON serialization.

Trees are stored as flat parallel arrays (one slot per node). Leaves carry
feature_index -1. ``cover`` is the training-sample weight that reached each
node: sample counts for classification trees, hessian mass for boosted
regression trees. The explainer consumes cover as its conditional-expectation
weights, so internal covers must equal the sum of their children.

Routing rule everywhere: an instance goes left iff x[feature] < threshold.
"""

import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1

LEAF = -1


class ModelError(ValueError):
    pass


@dataclass
class Tree:
    feature_index: np.ndarray  # int32, LEAF for leaves
    threshold: np.ndarray      # float64, 0.0 at leaves
    left: np.ndarray           # int32 child index, -1 at leaves
    right: np.ndarray
    leaf_value: np.ndarray     # float64 raw score, 0.0 at internal nodes
    cover: np.ndarray          # float64

    @property
    def n_nodes(self) -> int:
        return len(self.feature_index)

    def depth(self) -> int:
        def walk(node, d):
            if self.feature_index[node] == LEAF:
                return d
            return max(walk(self.left[node], d + 1), walk(self.right[node], d + 1))

        return walk(0, 0)

    def leaf_for(self, x: np.ndarray) -> int:
        node = 0
        while self.feature_index[node] != LEAF:
            if x[self.feature_index[node]] < self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return node

    def predict_values(self, X: np.ndarray) -> np.ndarray:
        """Leaf values for every row, via level-wise vectorized descent."""
        n = len(X)
        node = np.zeros(n, dtype=np.int64)
        while True:
            feats = self.feature_index[node]
            active = feats != LEAF
            if not active.any():
                break
            rows = np.flatnonzero(active)
            f = feats[rows]
            go_left = X[rows, f] < self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])
        return self.leaf_value[node]

    def expected_value(self) -> float:
        """Cover-weighted expectation of leaf values (the empty-coalition value)."""
        leaves = self.feature_index == LEAF
        total = self.cover[0]
        if total <= 0:
            raise ModelError("zero-cover root")
        return float(np.sum(self.leaf_value[leaves] * self.cover[leaves]) / total)

    def used_features(self) -> set[int]:
        return {int(f) for f in self.feature_index if f != LEAF}


@dataclass
class TreeEnsemble:
    trees: list[Tree]
    kind: str  # single_tree | bagged_forest | boosted
    feature_names: list[str]
    base_score: float = 0.0
    learning_rate: float = 1.0

    def __post_init__(self):
        if not self.trees:
            raise ModelError("ensemble must contain at least one tree")
        n = len(self.feature_names)
        for tree in self.trees:
            if tree.used_features() and max(tree.used_features()) >= n:
                raise ModelError("tree references feature index out of range")

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def tree_scale(self) -> float:
        """Weight of one tree's output in the ensemble margin."""
        if self.kind == "boosted":
            return self.learning_rate
        if self.kind == "bagged_forest":
            return 1.0 / len(self.trees)
        return 1.0

    def _check_width(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ModelError(
                f"expected {self.n_features} features, got {X.shape[1]}"
            )
        return X

    def raw_margin(self, X) -> np.ndarray:
        """Pre-sigmoid score: base_score + scale * sum of tree outputs.

        For single trees and forests this is the (mean) leaf class-1
        fraction itself, i.e. an identity margin.
        """
        X = self._check_width(X)
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict_values(X)
        return self.base_score + self.tree_scale() * total

    def predict_prob(self, X) -> np.ndarray:
        margin = self.raw_margin(X)
        if self.kind == "boosted":
            return 1.0 / (1.0 + np.exp(-margin))
        return margin

    def predict(self, X, cutoff: float = 0.5) -> np.ndarray:
        if not 0.0 < cutoff < 1.0:
            raise ModelError("cutoff must lie in (0, 1)")
        # ties at the cutoff classify positive
        return (self.predict_prob(X) >= cutoff).astype(np.int64)

    def to_json(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "feature_names": self.feature_names,
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "trees": [
                [
                    {
                        "feature_index": int(t.feature_index[i]),
                        "threshold": float(t.threshold[i]),
                        "left": int(t.left[i]),
                        "right": int(t.right[i]),
                        "leaf_value": float(t.leaf_value[i]),
                        "cover": float(t.cover[i]),
                    }
                    for i in range(t.n_nodes)
                ]
                for t in self.trees
            ],
        }
        return json.dumps(doc, sort_keys=True)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def from_json(cls, text: str) -> "TreeEnsemble":
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ModelError(f"unsupported schema_version {doc.get('schema_version')!r}")
        trees = []
        for nodes in doc["trees"]:
            trees.append(
                Tree(
                    feature_index=np.array([n["feature_index"] for n in nodes], dtype=np.int32),
                    threshold=np.array([n["threshold"] for n in nodes]),
                    left=np.array([n["left"] for n in nodes], dtype=np.int32),
                    right=np.array([n["right"] for n in nodes], dtype=np.int32),
                    leaf_value=np.array([n["leaf_value"] for n in nodes]),
                    cover=np.array([n["cover"] for n in nodes]),
                )
            )
        return cls(
            trees=trees,
            kind=doc["kind"],
            feature_names=doc["feature_names"],
            base_score=doc["base_score"],
            learning_rate=doc["learning_rate"],
        )

    @classmethod
    def load(cls, path: str) -> "TreeEnsemble":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


class _TreeBuilder:
    """Accumulates nodes for one tree during top-down growth."""

    def __init__(self):
        self.feature_index = []
        self.threshold = []
        self.left = []
        self.right = []
        self.leaf_value = []
        self.cover = []

    def add_node(self) -> int:
        for arr in (self.feature_index, self.left, self.right):
            arr.append(LEAF)
        for arr in (self.threshold, self.leaf_value, self.cover):
            arr.append(0.0)
        return len(self.feature_index) - 1

    def finish(self) -> Tree:
        return Tree(
            feature_index=np.array(self.feature_index, dtype=np.int32),
            threshold=np.array(self.threshold),
            left=np.array(self.left, dtype=np.int32),
            right=np.array(self.right, dtype=np.int32),
            leaf_value=np.array(self.leaf_value),
            cover=np.array(self.cover),
        )
