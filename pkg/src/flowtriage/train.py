"""Training for the three tree-based classifiers.

All splits use exact greedy enumeration: candidate thresholds are the
midpoints between consecutive distinct sorted values of each feature.
No histogram binning, so explanations and oracles see the exact model.
"""

from dataclasses import dataclass

import numpy as np

from .data import FlowTable
from .trees import LEAF, ModelError, Tree, TreeEnsemble, _TreeBuilder


@dataclass
class HyperParams:
    n_estimators: int = 100
    max_depth: int = 5
    learning_rate: float = 0.3
    min_child_cover: float = 1.0
    objective: str = "logistic"
    subsample: float = 1.0
    colsample: float | None = None  # None: forests use ceil(sqrt(n)) per split
    reg_lambda: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1 or self.max_depth < 1:
            raise ModelError("n_estimators and max_depth must be positive")
        if not 0.0 < self.subsample <= 1.0:
            raise ModelError("subsample must be in (0, 1]")
        if self.colsample is not None and not 0.0 < self.colsample <= 1.0:
            raise ModelError("colsample must be in (0, 1]")
        if self.objective != "logistic":
            raise ModelError(f"unsupported objective {self.objective!r}")


def _check_two_classes(labels: np.ndarray) -> None:
    if len(labels) == 0:
        raise ModelError("empty training data")
    if len(np.unique(labels)) < 2:
        raise ModelError("training data contains a single class")


def _candidate_features(n_features: int, colsample, kind: str, rng) -> np.ndarray:
    if colsample is None:
        if kind == "bagged_forest":
            m = int(np.ceil(np.sqrt(n_features)))
        else:
            m = n_features
    else:
        m = max(1, int(np.ceil(colsample * n_features)))
    if m >= n_features:
        return np.arange(n_features)
    return np.sort(rng.choice(n_features, size=m, replace=False))


def _best_split_gini(X, y, w, idx, candidates, min_child):
    """Best Gini-gain split over the given rows. Returns (feature, threshold)."""
    n = w[idx].sum()
    pos = (w[idx] * y[idx]).sum()
    p1 = pos / n
    parent = 1.0 - p1 * p1 - (1.0 - p1) ** 2
    best_gain, best = 1e-12, None
    for f in candidates:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        ws = w[idx][order]
        ps = ws * y[idx][order]
        boundary = np.flatnonzero(vs[:-1] < vs[1:])
        if len(boundary) == 0:
            continue
        cum_w = np.cumsum(ws)
        cum_p = np.cumsum(ps)
        nl = cum_w[boundary]
        nr = n - nl
        valid = (nl >= min_child) & (nr >= min_child)
        if not valid.any():
            continue
        pl = cum_p[boundary]
        pr = pos - pl
        with np.errstate(invalid="ignore", divide="ignore"):
            gini_l = 1.0 - (pl / nl) ** 2 - ((nl - pl) / nl) ** 2
            gini_r = 1.0 - (pr / nr) ** 2 - ((nr - pr) / nr) ** 2
        gains = np.where(valid, parent - (nl * gini_l + nr * gini_r) / n, -np.inf)
        i = int(np.argmax(gains))
        if gains[i] > best_gain:
            best_gain = gains[i]
            best = (int(f), float((vs[boundary[i]] + vs[boundary[i] + 1]) / 2.0))
    return best


def _grow_gini(builder, X, y, w, idx, depth, hp, kind, rng):
    node = builder.add_node()
    cover = float(w[idx].sum())
    builder.cover[node] = cover
    p1 = float((w[idx] * y[idx]).sum() / cover)
    split = None
    if depth < hp.max_depth and 0.0 < p1 < 1.0:
        candidates = _candidate_features(X.shape[1], hp.colsample, kind, rng)
        split = _best_split_gini(X, y, w, idx, candidates, hp.min_child_cover)
    if split is None:
        builder.leaf_value[node] = p1
        return node
    f, t = split
    builder.feature_index[node] = f
    builder.threshold[node] = t
    go_left = X[idx, f] < t
    builder.left[node] = _grow_gini(builder, X, y, w, idx[go_left], depth + 1, hp, kind, rng)
    builder.right[node] = _grow_gini(builder, X, y, w, idx[~go_left], depth + 1, hp, kind, rng)
    return node


def train_decision_tree(train: FlowTable, hp: HyperParams) -> TreeEnsemble:
    """Single CART tree; Gini gain, leaf value = class-1 fraction at the leaf."""
    _check_two_classes(train.labels)
    X, y = train.rows, train.labels.astype(np.float64)
    w = np.ones(len(y))
    builder = _TreeBuilder()
    rng = np.random.default_rng(hp.seed)
    _grow_gini(builder, X, y, w, np.arange(len(y)), 0, hp, "single_tree", rng)
    return TreeEnsemble([builder.finish()], "single_tree", list(train.feature_names))


def train_random_forest(train: FlowTable, hp: HyperParams) -> TreeEnsemble:
    """Bagged Gini trees with per-split feature subsampling.

    Bootstrap multiplicity enters as a sample weight so node covers stay
    conserved. Probability is the mean of per-tree leaf fractions.
    """
    _check_two_classes(train.labels)
    X, y = train.rows, train.labels.astype(np.float64)
    n = len(y)
    rng = np.random.default_rng(hp.seed)
    trees = []
    for _ in range(hp.n_estimators):
        draw = rng.integers(0, n, size=max(1, int(round(hp.subsample * n))))
        w = np.bincount(draw, minlength=n).astype(np.float64)
        idx = np.flatnonzero(w > 0)
        if len(np.unique(y[idx])) < 2:
            # degenerate bootstrap: keep it, the root just becomes a leaf
            pass
        builder = _TreeBuilder()
        _grow_gini(builder, X, y, w, idx, 0, hp, "bagged_forest", rng)
        trees.append(builder.finish())
    return TreeEnsemble(trees, "bagged_forest", list(train.feature_names))


def _best_split_gh(X, g, h, idx, candidates, lam, min_child):
    """Best Newton-gain split for a boosted regression tree node."""
    G = g[idx].sum()
    H = h[idx].sum()
    parent_score = G * G / (H + lam)
    best_gain, best = 1e-12, None
    for f in candidates:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        gs = np.cumsum(g[idx][order])
        hs = np.cumsum(h[idx][order])
        boundary = np.flatnonzero(vs[:-1] < vs[1:])
        if len(boundary) == 0:
            continue
        GL, HL = gs[boundary], hs[boundary]
        GR, HR = G - GL, H - HL
        valid = (HL >= min_child) & (HR >= min_child)
        if not valid.any():
            continue
        gains = np.where(
            valid,
            0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent_score),
            -np.inf,
        )
        i = int(np.argmax(gains))
        if gains[i] > best_gain:
            best_gain = gains[i]
            best = (int(f), float((vs[boundary[i]] + vs[boundary[i] + 1]) / 2.0))
    return best


def _grow_gh(builder, X, g, h, idx, depth, hp, rng):
    node = builder.add_node()
    H = float(h[idx].sum())
    builder.cover[node] = H
    split = None
    if depth < hp.max_depth:
        candidates = _candidate_features(X.shape[1], hp.colsample, "boosted", rng)
        split = _best_split_gh(X, g, h, idx, candidates, hp.reg_lambda, hp.min_child_cover)
    if split is None:
        builder.leaf_value[node] = float(-g[idx].sum() / (H + hp.reg_lambda))
        return node
    f, t = split
    builder.feature_index[node] = f
    builder.threshold[node] = t
    go_left = X[idx, f] < t
    builder.left[node] = _grow_gh(builder, X, g, h, idx[go_left], depth + 1, hp, rng)
    builder.right[node] = _grow_gh(builder, X, g, h, idx[~go_left], depth + 1, hp, rng)
    return node


def train_gbdt(train: FlowTable, hp: HyperParams) -> TreeEnsemble:
    """Second-order gradient boosting with the logistic objective.

    Per instance: gradient g = p - y, hessian h = p(1 - p); each round fits a
    regression tree to (g, h) with leaf value -sum(g) / (sum(h) + lambda).
    base_score is the log-odds of class-1 prevalence, and node cover is the
    hessian mass reaching the node.
    """
    _check_two_classes(train.labels)
    X, y = train.rows, train.labels.astype(np.float64)
    prevalence = float(y.mean())
    base_score = float(np.log(prevalence / (1.0 - prevalence)))
    margin = np.full(len(y), base_score)
    rng = np.random.default_rng(hp.seed)
    trees = []
    all_idx = np.arange(len(y))
    for _ in range(hp.n_estimators):
        p = 1.0 / (1.0 + np.exp(-margin))
        g = p - y
        h = p * (1.0 - p)
        if hp.subsample < 1.0:
            idx = np.sort(rng.choice(len(y), size=max(1, int(round(hp.subsample * len(y)))),
                                     replace=False))
        else:
            idx = all_idx
        builder = _TreeBuilder()
        _grow_gh(builder, X, g, h, idx, 0, hp, rng)
        tree = builder.finish()
        trees.append(tree)
        margin += hp.learning_rate * tree.predict_values(X)
    return TreeEnsemble(
        trees,
        "boosted",
        list(train.feature_names),
        base_score=base_score,
        learning_rate=hp.learning_rate,
    )


def assert_structure(ensemble: TreeEnsemble, max_depth: int | None = None,
                     tol: float = 1e-9) -> None:
    """Structural checks: depth bound and cover conservation at internal nodes."""
    for tree in ensemble.trees:
        if max_depth is not None and tree.depth() > max_depth:
            raise ModelError(f"tree depth {tree.depth()} exceeds {max_depth}")
        internal = np.flatnonzero(tree.feature_index != LEAF)
        for node in internal:
            children = tree.cover[tree.left[node]] + tree.cover[tree.right[node]]
            if abs(children - tree.cover[node]) > tol * max(1.0, abs(tree.cover[node])):
                raise ModelError("cover not conserved at internal node")
