import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from flowtriage.service import (DecisionLog, TriageStore, create_app, queue_order)
from flowtriage.triage import TriageVerdict


def verdict(row_id, confidence, disposition="accept_model", label=1):
    return TriageVerdict(row_id=row_id, predicted_label=label,
                         probability=confidence if label == 1 else 1 - confidence,
                         confidence=confidence, plot_sim_match=3, plot_sim_mismatch=1,
                         disposition=disposition, threshold_used=0.9)


class TestQueueOrder:
    def test_flags_first_then_ascending_confidence(self):
        vs = [
            verdict(1, 0.99),
            verdict(2, 0.55, "flag_fp"),
            verdict(3, 0.70),
            verdict(4, 0.80, "flag_fn", label=0),
        ]
        ordered = queue_order(vs)
        assert [v.row_id for v in ordered] == [2, 4, 3, 1]

    def test_row_id_breaks_ties(self):
        vs = [verdict(9, 0.7), verdict(3, 0.7), verdict(5, 0.7)]
        assert [v.row_id for v in queue_order(vs)] == [3, 5, 9]

    def test_empty(self):
        assert queue_order([]) == []


class TestDecisionLog:
    def test_append_assigns_gapless_seq(self, tmp_path):
        log = DecisionLog(str(tmp_path / "log.jsonl"))
        seqs = [log.append({"row_id": i, "decided_label": 1}) for i in range(5)]
        assert seqs == [1, 2, 3, 4, 5]

    def test_replay_continues_sequence(self, tmp_path):
        path = str(tmp_path / "log.jsonl")
        log = DecisionLog(path)
        log.append({"row_id": 1, "decided_label": 0})
        log.append({"row_id": 2, "decided_label": 1})
        reopened = DecisionLog(path)
        assert len(reopened.records) == 2
        assert reopened.append({"row_id": 3, "decided_label": 1}) == 3

    def test_latest_wins_per_row(self, tmp_path):
        log = DecisionLog(str(tmp_path / "log.jsonl"))
        log.append({"row_id": 7, "decided_label": 1})
        log.append({"row_id": 7, "decided_label": 0})
        log.append({"row_id": 8, "decided_label": 1})
        latest = log.latest_by_row([7, 8])
        assert latest[7]["decided_label"] == 0
        assert latest[8]["decided_label"] == 1
        # full history stays on disk
        assert len(log.records) == 3

    def test_lines_are_valid_json(self, tmp_path):
        path = str(tmp_path / "log.jsonl")
        log = DecisionLog(path)
        log.append({"row_id": 1, "decided_label": 1})
        with open(path) as fh:
            lines = [json.loads(line) for line in fh if line.strip()]
        assert lines[0]["seq"] == 1


@pytest.fixture
def served(tmp_path, blobs):
    """A live app over a small triaged session with ground truth attached."""
    from flowtriage.explain import build_explainer, group_mean
    from flowtriage.metrics import partition_outcomes
    from flowtriage.train import HyperParams, train_gbdt

    model = train_gbdt(blobs, HyperParams(n_estimators=15, max_depth=3, seed=4))
    explainer = build_explainer(model)
    part = partition_outcomes(model.predict(blobs.rows), blobs.labels, blobs.row_ids)
    profiles = {
        g: group_mean(explainer, blobs, members, 100, seed=0, group=g)
        for g, members in (("TP", part.tp), ("TN", part.tn),
                           ("FP", part.fp), ("FN", part.fn))
    }
    store = TriageStore(str(tmp_path / "decisions.jsonl"), profiles)
    batch = blobs.take(np.arange(40))
    store.enqueue_batch("s1", batch, model, explainer, profiles, threshold=0.9)
    return store, TestClient(create_app(store)), batch


class TestEndpoints:
    def test_queue_shape_and_order(self, served):
        store, client, batch = served
        body = client.get("/api/queue", params={"session": "s1"}).json()
        assert body["session"] == "s1"
        cards = body["queue"]
        assert len(cards) == 40
        flags = [c["disposition"] in ("flag_fp", "flag_fn") for c in cards]
        assert flags == sorted(flags, reverse=True)
        accepted = [c for c in cards if not (c["disposition"].startswith("flag"))]
        confs = [c["confidence"] for c in accepted]
        assert confs == sorted(confs)
        assert all(c["decided_label"] is None for c in cards)

    def test_unknown_session_error_shape(self, served):
        _, client, _ = served
        resp = client.get("/api/queue", params={"session": "nope"})
        assert resp.status_code == 404
        body = resp.json()
        assert set(body) == {"code", "message"}
        assert body["code"] == 404

    def test_overlays_payload(self, served):
        store, client, batch = served
        row_id = int(batch.row_ids[0])
        body = client.get(f"/api/instance/{row_id}/overlays").json()
        assert body["row_id"] == row_id
        assert len(body["overlays"]) == 2
        for overlay in body["overlays"]:
            assert {"group", "plot_sim", "bars"} <= set(overlay)
            for bar in overlay["bars"]:
                assert {"feature", "group_mean_phi", "instance_phi",
                        "overlap"} == set(bar)
            assert overlay["plot_sim"] == sum(b["overlap"] for b in overlay["bars"])

    def test_verdict_endpoint(self, served):
        store, client, batch = served
        row_id = int(batch.row_ids[3])
        body = client.get(f"/api/instance/{row_id}/verdict").json()
        assert body["row_id"] == row_id
        assert body["disposition"] in ("accept_model", "flag_fp", "flag_fn",
                                       "indeterminate_accept_model")

    def test_unknown_row_404(self, served):
        _, client, _ = served
        resp = client.get("/api/instance/999999/verdict")
        assert resp.status_code == 404
        assert resp.json()["code"] == 404

    def test_decision_round_trip(self, served):
        store, client, batch = served
        row_id = int(batch.row_ids[1])
        resp = client.post(f"/api/instance/{row_id}/decision",
                           json={"analyst_id": "ann", "decided_label": 0})
        assert resp.status_code == 200
        assert resp.json()["seq"] == 1
        card = next(c for c in client.get("/api/queue", params={"session": "s1"})
                    .json()["queue"] if c["row_id"] == row_id)
        assert card["decided_label"] == 0

    def test_decision_validation(self, served):
        store, client, batch = served
        row_id = int(batch.row_ids[0])
        resp = client.post(f"/api/instance/{row_id}/decision",
                           json={"analyst_id": "ann", "decided_label": 7})
        assert resp.status_code == 422

    def test_resubmission_latest_wins(self, served):
        store, client, batch = served
        row_id = int(batch.row_ids[2])
        for label in (1, 0):
            client.post(f"/api/instance/{row_id}/decision",
                        json={"analyst_id": "ann", "decided_label": label})
        report = client.get("/api/report", params={"session": "s1"}).json()
        assert report["decided"] == 1

    def test_report_groups(self, served):
        store, client, batch = served
        truth = {int(r): int(l) for r, l in zip(batch.row_ids, batch.labels)}
        for row_id in batch.row_ids[:10]:
            client.post(f"/api/instance/{int(row_id)}/decision",
                        json={"analyst_id": "ann",
                              "decided_label": truth[int(row_id)]})
        report = client.get("/api/report", params={"session": "s1"}).json()
        assert report["decided"] == 10
        groups = report["groups"]
        assert set(groups) == {"TP", "TN", "FP", "FN"}
        assert sum(g["tested"] for g in groups.values()) == 10
        assert all(g["correct"] == g["tested"] for g in groups.values())

    def test_profiles_endpoint(self, served):
        store, client, _ = served
        body = client.get("/api/profiles").json()
        assert set(body) == {"TP", "TN", "FP", "FN"}
        for group, doc in body.items():
            assert doc["group"] == group
            if not doc.get("absent"):
                assert doc["support"] >= 1
                assert len(doc["top_features"]) >= 1

    def test_durability_across_restart(self, served, tmp_path):
        store, client, batch = served
        row_id = int(batch.row_ids[5])
        client.post(f"/api/instance/{row_id}/decision",
                    json={"analyst_id": "ann", "decided_label": 1})
        # a new store over the same log path sees the decision immediately
        reopened = TriageStore(store.log.path, store.profiles)
        assert reopened.log.latest_by_row([row_id])[row_id]["decided_label"] == 1
