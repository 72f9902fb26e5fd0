"""Exact TreeSHAP attributions, cohort mean-SHAP profiles and top-k ranking.

The per-tree kernel has two interchangeable backends: a Cython extension
(built at install time) and a pure-Python fallback. Selection happens here
at import; set FLOWTRIAGE_PURE_PYTHON=1 to force the fallback.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from ..data import FlowTable
from ..trees import Tree, TreeEnsemble

if os.environ.get("FLOWTRIAGE_PURE_PYTHON"):
    from . import _kernel_py as kernel
else:
    try:
        from . import _treeshap as kernel  # type: ignore[no-redef]
    except ImportError:
        from . import _kernel_py as kernel

BACKEND = kernel.NAME

GROUPS = ("TP", "TN", "FP", "FN")


class ExplainError(ValueError):
    pass


@dataclass
class Explanation:
    """Per-instance signed SHAP attribution vector plus base value.

    base_value + sum(phis) equals the model's raw margin for the instance
    (additivity, within 1e-6).
    """

    feature_names: list[str]
    phis: np.ndarray
    base_value: float

    @property
    def feature_phis(self) -> dict[str, float]:
        return {f: float(p) for f, p in zip(self.feature_names, self.phis)}

    def to_dict(self) -> dict:
        return {
            "base_value": self.base_value,
            "phis": [
                {"feature": f, "phi": float(p)}
                for f, p in zip(self.feature_names, self.phis)
            ],
        }


@dataclass
class CohortProfile:
    """Mean signed SHAP vector for one outcome group with its top-k ranking."""

    group: str
    feature_names: list[str]
    mean_phis: np.ndarray
    support: int
    top_features: list[str]
    base_value: float

    def mean_phi_of(self, feature: str) -> float:
        return float(self.mean_phis[self.feature_names.index(feature)])

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "base_value": self.base_value,
            "support": self.support,
            "top_features": self.top_features,
            "phis": [
                {"feature": f, "phi": float(p)}
                for f, p in zip(self.feature_names, self.mean_phis)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CohortProfile":
        names = [e["feature"] for e in doc["phis"]]
        return cls(
            group=doc["group"],
            feature_names=names,
            mean_phis=np.array([e["phi"] for e in doc["phis"]]),
            support=doc["support"],
            top_features=list(doc["top_features"]),
            base_value=doc["base_value"],
        )


def rank_features(feature_names, phis, k: int) -> list[str]:
    """Top k feature names by |phi| descending, lexicographic tie-break."""
    order = sorted(zip(feature_names, phis), key=lambda fp: (-abs(fp[1]), fp[0]))
    return [f for f, _ in order[: min(k, len(order))]]


class Explainer:
    """Path-dependent TreeSHAP explainer over a trained ensemble.

    Node cover (recorded at training time) provides the conditional
    expectation weights, so no background dataset is needed at explain time.
    Immutable after construction; shap_values is pure.
    """

    def __init__(self, model: TreeEnsemble, train: FlowTable | None = None):
        if train is not None and list(train.feature_names) != list(model.feature_names):
            raise ExplainError("explainer/model feature sets differ")
        self.model = model
        scale = model.tree_scale()
        self.base_value = model.base_score + scale * sum(
            t.expected_value() for t in model.trees
        )
        self._depths = [t.depth() for t in model.trees]

    def shap_matrix(self, X) -> np.ndarray:
        """(n, d) matrix of signed phi values, one row per instance."""
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        if X.shape[1] != self.model.n_features:
            raise ExplainError("instance width does not match the model")
        if not np.isfinite(X).all():
            raise ExplainError("non-finite feature value")
        phi = np.zeros_like(X)
        scale = self.model.tree_scale()
        for tree, depth in zip(self.model.trees, self._depths):
            kernel.tree_shap_batch(
                tree.feature_index, tree.threshold, tree.left, tree.right,
                tree.leaf_value, tree.cover, X, phi, scale, depth,
            )
        return phi

    def shap_values(self, x) -> Explanation:
        phi = self.shap_matrix(np.atleast_2d(x))[0]
        return Explanation(list(self.model.feature_names), phi, self.base_value)


def build_explainer(model: TreeEnsemble, train: FlowTable | None = None) -> Explainer:
    return Explainer(model, train)


def group_mean(explainer: Explainer, table: FlowTable, member_ids,
               sample_cap: int, seed: int, group: str = "GLOBAL",
               k: int = 20) -> CohortProfile | None:
    """Mean signed SHAP over a random sample of a cohort.

    Samples min(len(members), sample_cap) members uniformly without
    replacement, deterministic under seed. Returns None for an empty member
    set; callers must treat the cohort as absent.
    """
    member_ids = sorted(int(m) for m in member_ids)
    if not member_ids:
        return None
    if sample_cap < 1:
        raise ExplainError("sample_cap must be positive")
    rng = np.random.default_rng(seed)
    if len(member_ids) > sample_cap:
        member_ids = sorted(rng.choice(member_ids, size=sample_cap, replace=False))
    idx = [table.index_of(m) for m in member_ids]
    phis = explainer.shap_matrix(table.rows[idx])
    mean = phis.mean(axis=0)
    return CohortProfile(
        group=group,
        feature_names=list(table.feature_names),
        mean_phis=mean,
        support=len(member_ids),
        top_features=rank_features(table.feature_names, mean, k),
        base_value=explainer.base_value,
    )


def top_k(profile: CohortProfile, k: int = 20) -> list[str]:
    return rank_features(profile.feature_names, profile.mean_phis, k)


def save_profiles(profiles: dict[str, CohortProfile | None], out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for group in GROUPS:
        path = os.path.join(out_dir, f"{group.lower()}.json")
        profile = profiles.get(group)
        doc = {"group": group, "absent": True} if profile is None else profile.to_dict()
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")


def load_profiles(out_dir: str) -> dict[str, CohortProfile | None]:
    profiles: dict[str, CohortProfile | None] = {}
    for group in GROUPS:
        with open(os.path.join(out_dir, f"{group.lower()}.json"), encoding="utf-8") as fh:
            doc = json.load(fh)
        profiles[group] = None if doc.get("absent") else CohortProfile.from_dict(doc)
    return profiles
