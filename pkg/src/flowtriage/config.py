"""Run configuration and seed derivation.

All randomness in a run flows from one root seed, fanned out per stage by
label so stages can be re-run in isolation with identical results.
"""

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field


def derive_seed(root_seed: int, label: str) -> int:
    """Deterministic per-stage seed derived from the root seed and a label."""
    digest = hashlib.sha256(f"{root_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class RunConfig:
    data: str | None = None
    label_col: str = "label"
    positive_labels: list[str] = field(default_factory=lambda: ["attack"])
    drop_cols: list[str] = field(default_factory=list)
    train_frac: float = 0.8
    seed: int = 0
    scale: bool = True
    smote_target: int | None = None
    smote_k: int = 5
    undersample_target: int | None = None
    balance_test: bool = True
    model: str = "gbdt"
    n_estimators: int = 100
    max_depth: int = 5
    learning_rate: float = 0.3
    min_child_cover: float = 1.0
    subsample: float = 1.0
    colsample: float = 1.0
    threshold: float = 0.90
    top_k: int = 20
    tau: float = 0.0
    sample_cap_correct: int = 10000
    sample_cap_incorrect: int = 1000
    out_dir: str = "out"
    serve_addr: str = "127.0.0.1:8000"

    @classmethod
    def from_json(cls, path: str) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def to_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(dataclasses.asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def override(self, **kwargs) -> "RunConfig":
        """Return a copy with the given non-None fields replaced (flags win)."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return dataclasses.replace(self, **updates)
