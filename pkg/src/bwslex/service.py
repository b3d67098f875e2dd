"""HTTP service that runs a live annotation study.

Studies are created from a design document, annotators are assigned to
batches, judgments are collected tuple by tuple, and the judgment log can
be exported raw or with attention-check filtering applied.

State is persisted as one append-only JSON-lines file per study; the
in-memory index is rebuilt by replaying those files at startup. All
mutations go through a per-study lock (single ordered writer), reads are
cheap snapshots.
"""

from __future__ import annotations

import csv
import io
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse

from .design import (
    Batch,
    StudyDesign,
    batch_design,
    default_attention_check,
    design_from_dict,
    validate_design,
)
from .lexicon import Emotion
from .scoring import JUDGMENT_HEADER, Judgment, filter_annotators, utc_now_iso

DEFAULT_TUPLES_PER_BATCH = 20

# demographics fields accepted on session open, with their expected types
_DEMOGRAPHIC_FIELDS = {
    "age": int,
    "gender": str,
    "education": str,
    "native_speaker": bool,
}


class ApiError(Exception):
    """Error carried to the client as {code, message, field?}."""

    def __init__(self, status: int, code: str, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.field = field

    def body(self) -> dict:
        doc = {"code": self.code, "message": self.message}
        if self.field is not None:
            doc["field"] = self.field
        return doc


@dataclass
class Session:
    session_id: str
    annotator_id: str
    demographics: Optional[dict]
    assigned_batch: str
    total: int
    cursor: int = 0

    @property
    def completed(self) -> bool:
        return self.cursor >= self.total


@dataclass
class Study:
    study_id: str
    design: StudyDesign
    batches: list[Batch]
    tuples_per_batch: int
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    sessions: dict[str, Session] = field(default_factory=dict)
    by_annotator: dict[str, str] = field(default_factory=dict)
    assignments: dict[str, int] = field(default_factory=dict)
    judgments: list[Judgment] = field(default_factory=list)

    def __post_init__(self):
        self._batch_by_id = {b.batch_id: b for b in self.batches}
        for b in self.batches:
            self.assignments.setdefault(b.batch_id, 0)

    def batch(self, batch_id: str) -> Batch:
        return self._batch_by_id[batch_id]

    def free_batch(self) -> Optional[Batch]:
        """Least-assigned batch with a free slot, ties broken by batch id."""
        candidates = [
            b for b in self.batches
            if self.assignments[b.batch_id] < b.required_annotators
        ]
        if not candidates:
            return None
        return min(candidates, key=lambda b: (self.assignments[b.batch_id], b.batch_id))


def _ensure_checks(design: StudyDesign) -> StudyDesign:
    """Give every emotion at least one attention check so exports can filter."""
    if all(design.check_tuples(e) for e in design.emotions):
        return design
    emotions = {}
    for emotion, tuples in design.emotions.items():
        tuples = list(tuples)
        if not design.check_tuples(emotion):
            tuples.append(default_attention_check(emotion, seed=design.seed))
        emotions[emotion] = tuples
    return StudyDesign(
        emotions=emotions,
        words=design.words,
        annotators_per_tuple=design.annotators_per_tuple,
        seed=design.seed,
    )


class StudyStore:
    """All studies plus their append-only event logs under one data directory."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.registry_lock = threading.Lock()
        self.studies: dict[str, Study] = {}
        self.by_idempotency: dict[str, str] = {}
        self.session_to_study: dict[str, str] = {}
        self._replay_all()

    # -- persistence ------------------------------------------------------

    def _log_path(self, study_id: str) -> Path:
        return self.data_dir / f"{study_id}.jsonl"

    def _append(self, study_id: str, event: dict) -> None:
        with open(self._log_path(study_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _replay_all(self) -> None:
        for path in sorted(self.data_dir.glob("*.jsonl")):
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._apply(json.loads(line))

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        if kind == "create":
            design = _ensure_checks(design_from_dict(event["design"]))
            tpb = event["tuples_per_batch"]
            study = Study(
                study_id=event["study_id"],
                design=design,
                batches=batch_design(design, tpb),
                tuples_per_batch=tpb,
            )
            self.studies[study.study_id] = study
            if event.get("idempotency_key"):
                self.by_idempotency[event["idempotency_key"]] = study.study_id
        elif kind == "session":
            study = self.studies[event["study_id"]]
            batch = study.batch(event["batch_id"])
            session = Session(
                session_id=event["session_id"],
                annotator_id=event["annotator_id"],
                demographics=event.get("demographics"),
                assigned_batch=batch.batch_id,
                total=len(batch.tuples),
            )
            study.sessions[session.session_id] = session
            study.by_annotator[session.annotator_id] = session.session_id
            study.assignments[batch.batch_id] += 1
            self.session_to_study[session.session_id] = study.study_id
        elif kind == "judgment":
            study = self.studies[event["study_id"]]
            session = study.sessions[event["session_id"]]
            study.judgments.append(Judgment(
                annotator_id=event["annotator_id"],
                tuple_id=event["tuple_id"],
                emotion=Emotion(event["emotion"]),
                best=event["best"],
                worst=event["worst"],
                timestamp=event["timestamp"],
            ))
            session.cursor += 1
        else:
            raise ValueError(f"unknown event type {kind!r}")

    # -- operations -------------------------------------------------------

    def create_study(self, body: dict) -> dict:
        doc = body.get("design")
        if not isinstance(doc, dict):
            raise ApiError(422, "invalid_design", "design document required", field="design")
        key = body.get("idempotency_key")
        if key is not None and not isinstance(key, str):
            raise ApiError(422, "invalid_request", "idempotency_key must be a string",
                           field="idempotency_key")
        tpb = body.get("tuples_per_batch", DEFAULT_TUPLES_PER_BATCH)
        if not isinstance(tpb, int) or isinstance(tpb, bool) or tpb < 1:
            raise ApiError(422, "invalid_request", "tuples_per_batch must be a positive integer",
                           field="tuples_per_batch")
        with self.registry_lock:
            if key and key in self.by_idempotency:
                return self._create_response(self.studies[self.by_idempotency[key]])
            try:
                design = design_from_dict(doc)
                validate_design(design)
                design = _ensure_checks(design)
            except Exception as exc:
                raise ApiError(422, "invalid_design", str(exc), field="design")
            event = {
                "event": "create",
                "study_id": uuid.uuid4().hex[:12],
                "design": doc,
                "tuples_per_batch": tpb,
                "idempotency_key": key,
            }
            # validate batching before persisting anything
            batch_design(design, tpb)
            self._append(event["study_id"], event)
            self._apply(event)
            return self._create_response(self.studies[event["study_id"]])

    def _create_response(self, study: Study) -> dict:
        slots = sum(b.required_annotators for b in study.batches)
        return {
            "study_id": study.study_id,
            "batches": len(study.batches),
            "slots": slots,
            "status": "open" if study.free_batch() else "full",
        }

    def get_study(self, study_id: str) -> Study:
        study = self.studies.get(study_id)
        if study is None:
            raise ApiError(404, "unknown_study", f"no study {study_id!r}")
        return study

    def open_session(self, study_id: str, body: dict) -> dict:
        study = self.get_study(study_id)
        annotator_id = body.get("annotator_id")
        if not isinstance(annotator_id, str) or not annotator_id:
            raise ApiError(422, "invalid_request", "annotator_id must be a non-empty string",
                           field="annotator_id")
        demographics = body.get("demographics")
        if demographics is not None:
            if not isinstance(demographics, dict):
                raise ApiError(422, "invalid_request", "demographics must be an object",
                               field="demographics")
            for name, value in demographics.items():
                expected = _DEMOGRAPHIC_FIELDS.get(name)
                if expected is None:
                    raise ApiError(422, "invalid_request", f"unknown demographics field {name!r}",
                                   field=f"demographics.{name}")
                if not isinstance(value, expected) or (expected is int and isinstance(value, bool)):
                    raise ApiError(422, "invalid_request",
                                   f"demographics.{name} must be {expected.__name__}",
                                   field=f"demographics.{name}")
        with study.lock:
            existing = study.by_annotator.get(annotator_id)
            if existing is not None:
                return self._session_response(study.sessions[existing], resumed=True)
            batch = study.free_batch()
            if batch is None:
                raise ApiError(409, "study_full", "all annotation slots are taken")
            event = {
                "event": "session",
                "study_id": study.study_id,
                "session_id": uuid.uuid4().hex,
                "annotator_id": annotator_id,
                "demographics": demographics,
                "batch_id": batch.batch_id,
            }
            self._append(study.study_id, event)
            self._apply(event)
            return self._session_response(study.sessions[event["session_id"]], resumed=False)

    def _session_response(self, session: Session, resumed: bool) -> dict:
        return {
            "session_id": session.session_id,
            "annotator_id": session.annotator_id,
            "assigned_batch": session.assigned_batch,
            "cursor": session.cursor,
            "total": session.total,
            "completed": session.completed,
            "resumed": resumed,
        }

    def get_session(self, session_id: str) -> tuple[Study, Session]:
        study_id = self.session_to_study.get(session_id)
        if study_id is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        study = self.studies[study_id]
        return study, study.sessions[session_id]

    def next_tuple(self, session_id: str) -> dict:
        study, session = self.get_session(session_id)
        with study.lock:
            if session.completed:
                return {"done": True}
            tup = study.batch(session.assigned_batch).tuples[session.cursor]
            # never expose is_attention_check or check_key on the wire
            return {
                "done": False,
                "tuple_id": tup.tuple_id,
                "emotion": tup.emotion.value,
                "words": list(tup.words),
                "index": session.cursor,
                "total": session.total,
            }

    def submit_judgment(self, session_id: str, body: dict) -> dict:
        study, session = self.get_session(session_id)
        fields = {}
        for name in ("tuple_id", "best", "worst"):
            value = body.get(name)
            if not isinstance(value, str) or not value:
                raise ApiError(422, "invalid_request", f"{name} must be a non-empty string",
                               field=name)
            fields[name] = value
        with study.lock:
            if session.completed:
                raise ApiError(409, "session_complete", "all tuples already answered")
            tup = study.batch(session.assigned_batch).tuples[session.cursor]
            if fields["tuple_id"] != tup.tuple_id:
                raise ApiError(409, "stale_tuple",
                               f"expected tuple {tup.tuple_id!r}, got {fields['tuple_id']!r}")
            if fields["best"] == fields["worst"]:
                raise ApiError(422, "equal_choice", "best and worst must differ", field="worst")
            for name in ("best", "worst"):
                if fields[name] not in tup.words:
                    raise ApiError(422, "word_not_in_tuple",
                                   f"{fields[name]!r} is not in the current tuple", field=name)
            event = {
                "event": "judgment",
                "study_id": study.study_id,
                "session_id": session.session_id,
                "annotator_id": session.annotator_id,
                "tuple_id": tup.tuple_id,
                "emotion": tup.emotion.value,
                "best": fields["best"],
                "worst": fields["worst"],
                "timestamp": utc_now_iso(),
            }
            self._append(study.study_id, event)
            self._apply(event)
            return {"accepted": True, "cursor": session.cursor, "completed": session.completed}

    def export_csv(self, study_id: str, filtered: bool) -> str:
        study = self.get_study(study_id)
        with study.lock:
            judgments = list(study.judgments)
        if filtered:
            judgments = filter_annotators(judgments, study.design).kept
        judgments.sort(key=lambda j: (j.emotion.value, j.tuple_id, j.annotator_id))
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        if filtered:
            writer.writerow(JUDGMENT_HEADER)
            for j in judgments:
                writer.writerow([j.annotator_id, j.tuple_id, j.emotion.value,
                                 j.best, j.worst, j.timestamp])
        else:
            writer.writerow(JUDGMENT_HEADER + ["is_attention_check"])
            for j in judgments:
                check = study.design.tuple_by_id(j.tuple_id).is_attention_check
                writer.writerow([j.annotator_id, j.tuple_id, j.emotion.value,
                                 j.best, j.worst, j.timestamp, str(check).lower()])
        return out.getvalue()

    def status(self, study_id: str) -> dict:
        study = self.get_study(study_id)
        with study.lock:
            batches = []
            all_full = True
            all_done = True
            for b in study.batches:
                assigned = study.assignments[b.batch_id]
                done = sum(
                    1 for s in study.sessions.values()
                    if s.assigned_batch == b.batch_id and s.completed
                )
                all_full = all_full and assigned >= b.required_annotators
                all_done = all_done and done >= b.required_annotators
                batches.append({
                    "batch_id": b.batch_id,
                    "assigned": assigned,
                    "capacity": b.required_annotators,
                    "completed_sessions": done,
                })
            return {
                "study_id": study.study_id,
                "status": "complete" if all_done else ("full" if all_full else "open"),
                "batches": batches,
                "sessions": len(study.sessions),
                "judgments": len(study.judgments),
            }


def create_app(data_dir: str | Path) -> FastAPI:
    store = StudyStore(data_dir)
    app = FastAPI(title="bwslex annotation service")
    app.state.store = store

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content={
            "code": "invalid_request",
            "message": "malformed request",
        })

    async def read_json(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise ApiError(422, "invalid_request", "request body must be valid JSON")
        if not isinstance(body, dict):
            raise ApiError(422, "invalid_request", "request body must be a JSON object")
        return body

    @app.post("/studies")
    async def create_study(request: Request):
        return store.create_study(await read_json(request))

    @app.post("/studies/{study_id}/sessions")
    async def open_session(study_id: str, request: Request):
        return store.open_session(study_id, await read_json(request))

    @app.get("/sessions/{session_id}/next")
    async def next_tuple(session_id: str):
        return store.next_tuple(session_id)

    @app.post("/sessions/{session_id}/judgments")
    async def submit_judgment(session_id: str, request: Request):
        return store.submit_judgment(session_id, await read_json(request))

    @app.get("/studies/{study_id}/export")
    async def export_study(study_id: str, filtered: bool = False):
        return PlainTextResponse(store.export_csv(study_id, filtered), media_type="text/csv")

    @app.get("/studies/{study_id}/status")
    async def study_status(study_id: str):
        return store.status(study_id)

    return app
