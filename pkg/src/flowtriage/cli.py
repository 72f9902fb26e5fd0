"""Operator entry point: ingest -> train -> evaluate -> profiles -> triage ->
serve -> report, plus a synthetic-data generator.

Defaults come from RunConfig; a --config JSON file overrides them and
explicit flags win over both.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import data as dp
from . import explain, metrics, synth
from .config import RunConfig, derive_seed
from .train import HyperParams, train_decision_tree, train_gbdt, train_random_forest
from .trees import TreeEnsemble
from .triage import triage_instance
from .service import TriageStore, create_app, queue_order


def _cfg(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {k: v for k, v in vars(args).items()
                 if k in RunConfig.__dataclass_fields__ and v is not None}
    return cfg.override(**overrides)


def _split_list(text):
    return [t for t in text.split(",") if t] if text else []


def cmd_synth(args) -> int:
    cfg = _cfg(args)
    table = synth.make_synthetic(
        n_rows=args.rows, n_features=args.features, separation=args.separation,
        noise_frac=args.noise_frac, seed=derive_seed(cfg.seed, "synth"),
    )
    synth.write_raw_csv(table, args.out)
    print(f"wrote {len(table)} rows to {args.out}")
    return 0


def cmd_ingest(args) -> int:
    cfg = _cfg(args)
    if not cfg.data:
        print("ingest: --data is required", file=sys.stderr)
        return 2
    table = dp.load_csv(cfg.data, cfg.label_col, set(cfg.positive_labels))
    before = len(table)
    table = dp.clean(table, cfg.drop_cols)
    print(f"cleaned: dropped {before - len(table)} rows, {len(cfg.drop_cols)} columns")
    train, test = dp.split(table, dp.SplitSpec(cfg.train_frac, derive_seed(cfg.seed, "split")))

    scaler = None
    if cfg.scale:
        scaler = dp.fit_minmax(train)
        train = dp.apply_minmax(scaler, train)
        test = dp.apply_minmax(scaler, test)

    counts = train.class_counts()
    minority = 0 if counts[0] <= counts[1] else 1
    if cfg.smote_target is not None:
        train = dp.smote_oversample(train, minority, cfg.smote_target, cfg.smote_k,
                                    derive_seed(cfg.seed, "smote"))
    if cfg.undersample_target is not None:
        train = dp.random_undersample(train, 1 - minority, cfg.undersample_target,
                                      derive_seed(cfg.seed, "undersample"))
    if cfg.balance_test:
        tc = test.class_counts()
        larger = 0 if tc[0] >= tc[1] else 1
        test = dp.random_undersample(test, larger, tc[1 - larger],
                                     derive_seed(cfg.seed, "balance-test"))

    os.makedirs(cfg.out_dir, exist_ok=True)
    dp.save_table(train, os.path.join(cfg.out_dir, "train.csv"), cfg.label_col, scaler)
    dp.save_table(test, os.path.join(cfg.out_dir, "test.csv"), cfg.label_col, scaler)
    print(f"train: {train.class_counts()}  test: {test.class_counts()}")
    return 0


def _hyperparams(cfg: RunConfig) -> HyperParams:
    return HyperParams(
        n_estimators=cfg.n_estimators, max_depth=cfg.max_depth,
        learning_rate=cfg.learning_rate, min_child_cover=cfg.min_child_cover,
        subsample=cfg.subsample,
        colsample=None if cfg.colsample >= 1.0 and cfg.model == "rf" else cfg.colsample,
        seed=derive_seed(cfg.seed, "train"),
    )


def cmd_train(args) -> int:
    cfg = _cfg(args)
    table = dp.load_table(args.train)
    hp = _hyperparams(cfg)
    trainer = {"dt": train_decision_tree, "rf": train_random_forest, "gbdt": train_gbdt}
    if cfg.model not in trainer:
        print(f"unknown model {cfg.model!r}", file=sys.stderr)
        return 2
    model = trainer[cfg.model](table, hp)
    model.save(args.out)
    print(f"trained {cfg.model} ({len(model.trees)} trees) -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    model = TreeEnsemble.load(args.model)
    test = dp.load_table(args.test)
    probs = model.predict_prob(test.rows)
    preds = model.predict(test.rows)
    part = metrics.partition_outcomes(preds, test.labels, test.row_ids)
    report = metrics.summarize(part, brier=metrics.brier_score(probs, test.labels))
    print(report.to_text())
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    if args.bands_out:
        thresholds = [float(t) for t in _split_list(args.thresholds)]
        bands = metrics.probability_bands(
            {int(r): float(p) for r, p in zip(test.row_ids, probs)}, part, thresholds)
        with open(args.bands_out, "w", encoding="utf-8") as fh:
            json.dump({g: {str(t): v for t, v in row.items()} for g, row in bands.items()},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _build_profiles(model, table, cfg: RunConfig):
    explainer = explain.build_explainer(model)
    preds = model.predict(table.rows)
    part = metrics.partition_outcomes(preds, table.labels, table.row_ids)
    caps = {"TP": cfg.sample_cap_correct, "TN": cfg.sample_cap_correct,
            "FP": cfg.sample_cap_incorrect, "FN": cfg.sample_cap_incorrect}
    profiles = {}
    for group in explain.GROUPS:
        members = getattr(part, group.lower())
        profiles[group] = explain.group_mean(
            explainer, table, members, caps[group],
            derive_seed(cfg.seed, f"profile-{group}"), group=group, k=cfg.top_k)
    return explainer, profiles


def cmd_profiles(args) -> int:
    cfg = _cfg(args)
    model = TreeEnsemble.load(args.model)
    table = dp.load_table(args.data)
    _, profiles = _build_profiles(model, table, cfg)
    explain.save_profiles(profiles, cfg.out_dir)
    supports = {g: (p.support if p else "absent") for g, p in profiles.items()}
    print(f"profiles -> {cfg.out_dir}  supports: {supports}")
    return 0


def cmd_triage(args) -> int:
    cfg = _cfg(args)
    model = TreeEnsemble.load(args.model)
    table = dp.load_table(args.data)
    profiles = explain.load_profiles(args.profiles_dir)
    explainer = explain.build_explainer(model)
    verdicts = []
    for i in range(len(table)):
        verdict, _ = triage_instance(table.rows[i], table.row_ids[i], model, explainer,
                                     profiles, cfg.threshold, cfg.top_k, cfg.tau)
        verdicts.append(verdict)
    with open(args.out, "w", encoding="utf-8") as fh:
        for verdict in queue_order(verdicts):
            fh.write(json.dumps(verdict.to_dict(), sort_keys=True) + "\n")
    flagged = sum(v.is_flag() for v in verdicts)
    print(f"triaged {len(verdicts)} instances, {flagged} flagged -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    cfg = _cfg(args)
    model = TreeEnsemble.load(args.model)
    table = dp.load_table(args.data)
    profiles = explain.load_profiles(args.profiles_dir)
    explainer = explain.build_explainer(model)
    store = TriageStore(args.decision_log, profiles)
    store.enqueue_batch(args.session, table, model, explainer, profiles,
                        cfg.threshold, cfg.top_k, cfg.tau)
    app = create_app(store)
    if args.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=args.ui_dir, html=True), name="ui")
    host, _, port = cfg.serve_addr.partition(":")
    uvicorn.run(app, host=host, port=int(port or 8000))
    return 0


def cmd_report(args) -> int:
    """Offline Table-5-style report from a decision log plus ground truth."""
    table = dp.load_table(args.data) if args.data else None
    truth = None if table is None else \
        {int(r): int(l) for r, l in zip(table.row_ids, table.labels)}
    latest: dict[int, dict] = {}
    with open(args.decision_log, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            if args.session and rec.get("session") != args.session:
                continue
            latest[rec["row_id"]] = rec
    report: dict = {"session": args.session, "decided": len(latest), "groups": None}
    if truth is not None:
        groups = {g: {"tested": 0, "correct": 0} for g in explain.GROUPS}
        for row_id, rec in latest.items():
            t = truth[row_id]
            predicted = rec["verdict_snapshot"]["predicted_label"]
            group = ("TP" if t == 1 else "FP") if predicted == 1 else \
                ("TN" if t == 0 else "FN")
            groups[group]["tested"] += 1
            groups[group]["correct"] += int(rec["decided_label"] == t)
        report["groups"] = groups
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowtriage")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="RunConfig JSON; flags win over it")
        p.add_argument("--seed", type=int)

    p = sub.add_parser("synth", help="generate the synthetic separable dataset")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--rows", type=int, default=20000)
    p.add_argument("--features", type=int, default=10)
    p.add_argument("--separation", type=float, default=1.0)
    p.add_argument("--noise-frac", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="load, clean, scale, split and rebalance a CSV")
    common(p)
    p.add_argument("--data")
    p.add_argument("--label-col", dest="label_col")
    p.add_argument("--positive-labels", dest="positive_labels", type=_split_list)
    p.add_argument("--drop-cols", dest="drop_cols", type=_split_list)
    p.add_argument("--train-frac", dest="train_frac", type=float)
    p.add_argument("--no-scale", dest="scale", action="store_false", default=None)
    p.add_argument("--smote-target", dest="smote_target", type=int)
    p.add_argument("--smote-k", dest="smote_k", type=int)
    p.add_argument("--undersample-target", dest="undersample_target", type=int)
    p.add_argument("--no-balance-test", dest="balance_test", action="store_false",
                   default=None)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train dt/rf/gbdt on an ingested table")
    common(p)
    p.add_argument("--train", required=True, help="train.csv written by ingest")
    p.add_argument("--model", choices=["dt", "rf", "gbdt"])
    p.add_argument("--n-estimators", dest="n_estimators", type=int)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--min-child-cover", dest="min_child_cover", type=float)
    p.add_argument("--subsample", type=float)
    p.add_argument("--colsample", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="metrics report on a test table")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bands-out", dest="bands_out")
    p.add_argument("--thresholds", default="0.70,0.75,0.80,0.85,0.90")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("profiles", help="build TP/TN/FP/FN cohort profiles")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--cap-correct", dest="sample_cap_correct", type=int)
    p.add_argument("--cap-incorrect", dest="sample_cap_incorrect", type=int)
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_profiles)

    p = sub.add_parser("triage", help="triage a batch, flags-first JSONL")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--profiles-dir", dest="profiles_dir", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_triage)

    p = sub.add_parser("serve", help="run the analyst HTTP service")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--profiles-dir", dest="profiles_dir", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--session", default="default")
    p.add_argument("--threshold", type=float)
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--decision-log", dest="decision_log", default="decisions.jsonl")
    p.add_argument("--serve-addr", dest="serve_addr")
    p.add_argument("--ui-dir", dest="ui_dir")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="session report from a decision log")
    common(p)
    p.add_argument("--decision-log", dest="decision_log", required=True)
    p.add_argument("--session", default=None)
    p.add_argument("--data", help="table with ground-truth labels")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (dp.DataError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
