"""Overlap scoring and the per-instance triage decision rule.

An instance's explanation is compared against cohort mean-SHAP profiles: for
each of the cohort's top-k features, the instance bar "overlaps" the cohort
bar when both point the same way (and optionally are close in magnitude).
The count of overlaps is plot_sim. The decision rule then accepts the model's
label when the predicted-class confidence clears the threshold or when the
matching cohort overlaps at least as much as the mismatching one; otherwise
the prediction is flagged as a suspected FP (attack predictions) or FN
(benign predictions).
"""

from dataclasses import dataclass

import numpy as np

from .explain import CohortProfile, Explainer, Explanation
from .metrics import predicted_class_confidence
from .trees import TreeEnsemble

DISPOSITIONS = ("accept_model", "flag_fp", "flag_fn", "indeterminate_accept_model")


@dataclass
class OverlayBar:
    feature: str
    group_mean_phi: float
    instance_phi: float
    overlap: bool

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "group_mean_phi": self.group_mean_phi,
            "instance_phi": self.instance_phi,
            "overlap": self.overlap,
        }


@dataclass
class OverlayPlot:
    group: str
    bars: list[OverlayBar]  # in the cohort's top-k rank order
    plot_sim: int

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "plot_sim": self.plot_sim,
            "bars": [b.to_dict() for b in self.bars],
        }


@dataclass
class TriageVerdict:
    row_id: int
    predicted_label: int
    probability: float
    confidence: float
    plot_sim_match: int | None
    plot_sim_mismatch: int | None
    disposition: str
    threshold_used: float

    def is_flag(self) -> bool:
        return self.disposition in ("flag_fp", "flag_fn")

    def to_dict(self) -> dict:
        return {
            "row_id": self.row_id,
            "predicted_label": self.predicted_label,
            "probability": self.probability,
            "confidence": self.confidence,
            "plot_sim_match": self.plot_sim_match,
            "plot_sim_mismatch": self.plot_sim_mismatch,
            "disposition": self.disposition,
            "threshold_used": self.threshold_used,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TriageVerdict":
        return cls(**{k: doc[k] for k in (
            "row_id", "predicted_label", "probability", "confidence",
            "plot_sim_match", "plot_sim_mismatch", "disposition", "threshold_used")})


def _overlaps(phi_i: float, phi_g: float, tau: float) -> bool:
    if phi_i == 0.0 or phi_g == 0.0:
        return False
    if np.sign(phi_i) != np.sign(phi_g):
        return False
    lo, hi = sorted((abs(phi_i), abs(phi_g)))
    return lo / hi >= tau


def plot_sim(instance_expl: Explanation, profile: CohortProfile, k: int = 20,
             tau: float = 0.0) -> tuple[int, OverlayPlot]:
    """Overlap count between an instance's bars and a cohort's top-k bars.

    tau in [0, 1] adds a magnitude-ratio floor to the sign-agreement
    predicate; tau = 0 is sign-only.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    inst = instance_expl.feature_phis
    bars = []
    for feature in profile.top_features[: min(k, len(profile.top_features))]:
        phi_g = profile.mean_phi_of(feature)
        phi_i = inst[feature]
        bars.append(OverlayBar(feature, phi_g, phi_i, _overlaps(phi_i, phi_g, tau)))
    score = sum(b.overlap for b in bars)
    return score, OverlayPlot(profile.group, bars, score)


def decide(predicted_label: int, confidence: float,
           sim_match: int | None, sim_mismatch: int | None,
           threshold: float) -> str:
    """The core disposition rule; ties between the two plot_sim scores yield
    to the model's label."""
    if sim_match is None or sim_mismatch is None:
        if confidence >= threshold:
            return "accept_model"
        return "indeterminate_accept_model"
    if confidence >= threshold or sim_match >= sim_mismatch:
        return "accept_model"
    return "flag_fp" if predicted_label == 1 else "flag_fn"


def triage_instance(x, row_id: int, model: TreeEnsemble, explainer: Explainer,
                    profiles: dict[str, CohortProfile | None],
                    threshold: float = 0.90, k: int = 20,
                    tau: float = 0.0) -> tuple[TriageVerdict, list[OverlayPlot]]:
    """Run the full decision procedure for one instance.

    profiles maps group name ("TP", "TN", "FP", "FN") to its CohortProfile,
    or None when the cohort was empty on the evaluation data.
    """
    prob = float(model.predict_prob(np.atleast_2d(x))[0])
    label = int(prob >= 0.5)
    confidence = predicted_class_confidence(prob, label)
    expl = explainer.shap_values(x)
    match_group, mismatch_group = ("TP", "FP") if label == 1 else ("TN", "FN")
    overlays: list[OverlayPlot] = []
    sims: dict[str, int | None] = {}
    for group in (match_group, mismatch_group):
        profile = profiles.get(group)
        if profile is None:
            sims[group] = None
        else:
            score, overlay = plot_sim(expl, profile, k, tau)
            sims[group] = score
            overlays.append(overlay)
    disposition = decide(label, confidence, sims[match_group], sims[mismatch_group],
                         threshold)
    verdict = TriageVerdict(
        row_id=int(row_id),
        predicted_label=label,
        probability=prob,
        confidence=confidence,
        plot_sim_match=sims[match_group],
        plot_sim_mismatch=sims[mismatch_group],
        disposition=disposition,
        threshold_used=threshold,
    )
    return verdict, overlays


def build_overlays(instance_expl: Explanation,
                   profiles: dict[str, CohortProfile | None],
                   predicted_label: int, k: int = 20,
                   tau: float = 0.0) -> list[OverlayPlot]:
    """Overlay pair for rendering: (TP, FP) for attack predictions, (TN, FN)
    for benign. Absent cohorts are simply omitted (a one-sided result)."""
    groups = ("TP", "FP") if predicted_label == 1 else ("TN", "FN")
    overlays = []
    for group in groups:
        profile = profiles.get(group)
        if profile is not None:
            overlays.append(plot_sim(instance_expl, profile, k, tau)[1])
    return overlays
