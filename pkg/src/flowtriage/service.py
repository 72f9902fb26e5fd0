"""HTTP facade over the triage engine.

Serves the prediction queue and overlay payloads, records analyst decisions
in an append-only JSONL log (durably, before acknowledgment) and emits
per-group session reports against ground truth when available.
"""

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .data import FlowTable
from .explain import CohortProfile, Explainer
from .trees import TreeEnsemble
from .triage import OverlayPlot, TriageVerdict, triage_instance

GROUP_NAMES = ("TP", "TN", "FP", "FN")


class ServiceError(RuntimeError):
    pass


class DecisionLog:
    """Append-only line-delimited JSON log with gapless sequence numbers.

    Every submission is appended (full history); the logical decision per
    (row_id, analyst_id) is latest-wins. Writes are serialized and fsynced
    before the caller gets an acknowledgment.
    """

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self.records: list[dict] = []
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self.records.append(json.loads(line))
        self._next_seq = (self.records[-1]["seq"] + 1) if self.records else 1

    def append(self, record: dict) -> int:
        with self._lock:
            record = dict(record, seq=self._next_seq)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self.records.append(record)
            self._next_seq += 1
            return record["seq"]

    def latest_by_row(self, row_ids) -> dict[int, dict]:
        """Latest decision per row_id, restricted to the given rows."""
        wanted = set(int(r) for r in row_ids)
        latest: dict[int, dict] = {}
        for rec in self.records:  # ascending seq
            if rec["row_id"] in wanted:
                latest[rec["row_id"]] = rec
        return latest


@dataclass
class Session:
    session_id: str
    verdicts: list[TriageVerdict]  # queue order
    overlays: dict[int, list[OverlayPlot]]
    truth: dict[int, int] | None = None

    def row_ids(self) -> list[int]:
        return [v.row_id for v in self.verdicts]


def queue_order(verdicts: list[TriageVerdict]) -> list[TriageVerdict]:
    """Flags first, then ascending confidence; row_id as final tie-break."""
    return sorted(verdicts, key=lambda v: (not v.is_flag(), v.confidence, v.row_id))


class TriageStore:
    """Holds triaged sessions plus the shared artifacts and decision log."""

    def __init__(self, decision_log_path: str,
                 profiles: dict[str, CohortProfile | None] | None = None):
        self.log = DecisionLog(decision_log_path)
        self.profiles = profiles or {}
        self.sessions: dict[str, Session] = {}

    def enqueue_batch(self, session_id: str, table: FlowTable, model: TreeEnsemble,
                      explainer: Explainer,
                      profiles: dict[str, CohortProfile | None],
                      threshold: float = 0.90, k: int = 20, tau: float = 0.0,
                      with_truth: bool = True) -> Session:
        if list(table.feature_names) != list(model.feature_names):
            raise ServiceError("feature mismatch between table and model")
        verdicts, overlays = [], {}
        for i in range(len(table)):
            verdict, plots = triage_instance(
                table.rows[i], table.row_ids[i], model, explainer, profiles,
                threshold=threshold, k=k, tau=tau,
            )
            verdicts.append(verdict)
            overlays[verdict.row_id] = plots
        session = Session(
            session_id=session_id,
            verdicts=queue_order(verdicts),
            overlays=overlays,
            truth={int(r): int(l) for r, l in zip(table.row_ids, table.labels)}
            if with_truth else None,
        )
        self.sessions[session_id] = session
        self.profiles = profiles
        return session

    def find_row(self, row_id: int) -> tuple[Session, TriageVerdict]:
        for session in self.sessions.values():
            for verdict in session.verdicts:
                if verdict.row_id == row_id:
                    return session, verdict
        raise KeyError(f"unknown row_id {row_id}")

    def record_decision(self, row_id: int, analyst_id: str, decided_label: int,
                        note: str | None = None) -> int:
        session, verdict = self.find_row(row_id)
        if decided_label not in (0, 1):
            raise ValueError("decided_label must be 0 or 1")
        return self.log.append({
            "session": session.session_id,
            "row_id": int(row_id),
            "analyst_id": analyst_id,
            "decided_label": int(decided_label),
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "verdict_snapshot": verdict.to_dict(),
            "note": note,
        })

    def session_report(self, session_id: str) -> dict:
        if session_id not in self.sessions:
            raise KeyError(f"unknown session {session_id!r}")
        session = self.sessions[session_id]
        latest = self.log.latest_by_row(session.row_ids())
        report: dict = {
            "session": session_id,
            "decided": len(latest),
            "groups": None,
        }
        if session.truth is not None:
            groups = {g: {"tested": 0, "correct": 0} for g in GROUP_NAMES}
            for row_id, rec in latest.items():
                truth = session.truth[row_id]
                predicted = rec["verdict_snapshot"]["predicted_label"]
                if predicted == 1:
                    group = "TP" if truth == 1 else "FP"
                else:
                    group = "TN" if truth == 0 else "FN"
                groups[group]["tested"] += 1
                if rec["decided_label"] == truth:
                    groups[group]["correct"] += 1
            report["groups"] = groups
        return report


class DecisionIn(BaseModel):
    analyst_id: str
    decided_label: int
    note: str | None = None


def create_app(store: TriageStore) -> FastAPI:
    app = FastAPI(title="flowtriage")

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.status_code, "message": str(exc.detail)})

    def _session(session_id: str) -> Session:
        if session_id not in store.sessions:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return store.sessions[session_id]

    def _row(row_id: int) -> tuple[Session, TriageVerdict]:
        try:
            return store.find_row(row_id)
        except KeyError:
            raise HTTPException(404, f"unknown row_id {row_id}")

    @app.get("/api/queue")
    def queue(session: str):
        sess = _session(session)
        latest = store.log.latest_by_row(sess.row_ids())
        cards = []
        for verdict in sess.verdicts:
            card = verdict.to_dict()
            decision = latest.get(verdict.row_id)
            card["decided_label"] = None if decision is None else decision["decided_label"]
            cards.append(card)
        return {"session": session, "queue": cards}

    @app.get("/api/instance/{row_id}/overlays")
    def overlays(row_id: int):
        sess, verdict = _row(row_id)
        return {
            "row_id": row_id,
            "predicted_label": verdict.predicted_label,
            "overlays": [o.to_dict() for o in sess.overlays[row_id]],
        }

    @app.get("/api/instance/{row_id}/verdict")
    def verdict(row_id: int):
        _, v = _row(row_id)
        return v.to_dict()

    @app.post("/api/instance/{row_id}/decision")
    def decision(row_id: int, body: DecisionIn):
        _row(row_id)
        try:
            seq = store.record_decision(row_id, body.analyst_id, body.decided_label,
                                        body.note)
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        return {"seq": seq, "row_id": row_id, "decided_label": body.decided_label}

    @app.get("/api/report")
    def report(session: str):
        _session(session)
        return store.session_report(session)

    @app.get("/api/profiles")
    def profiles():
        out = {}
        for group in GROUP_NAMES:
            profile = store.profiles.get(group)
            out[group] = {"group": group, "absent": True} if profile is None \
                else profile.to_dict()
        return out

    return app
