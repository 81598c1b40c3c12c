"""HTTP annotation service.

Server state is a pure function of (corpus, frames, decision log): every
write appends a Decision to the JSONL log and folds it into the argument
store under one lock, so a restart that replays the log reproduces the
live state exactly. All GET endpoints are side-effect free.

The queue serves each annotator their pending mentions in two phases:
roleset decisions first, then argument decisions; a mention's argument
slots only surface once its roleset decision exists.
"""

from __future__ import annotations

import random
import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .annotations import xamr_to_json
from .config import ServiceConfig
from .corpus import Corpus, Mention, ingest_corpus, load_corpus, mention_to_dict
from .embedding import HashingEmbedder
from .errors import XamrError
from .frames import FrameIndex, load_frames, parse_roleset_id, search_rolesets
from .metrics import acceptance_ratios, corpus_stats
from .prompts import marked_views
from .store import (
    ARG_SLOTS,
    ArgumentStore,
    Decision,
    DecisionAction,
    Slot,
    StoreScope,
    append_decision,
    apply_decision,
    decisions_to_annotations,
    default_selection,
    load_decisions,
    rank,
    slot_value_from_json,
    slot_value_to_json,
)

PHASE_ROLESET = 1
PHASE_ARGUMENTS = 2


class ServiceState:
    """Corpus, frames, store, and the decision log, with serialized writes."""

    def __init__(self, corpus: Corpus, frames: FrameIndex, config: ServiceConfig):
        self.corpus = corpus
        self.frames = frames
        self.config = config
        self.provider = HashingEmbedder()
        self.log_path = Path(config.decision_log)
        self.lock = threading.Lock()

        order = sorted(
            corpus.mentions, key=lambda m: (m.topic_id, m.doc_id, m.sentence_idx, m.mention_id)
        )
        if config.shuffle_seed is not None:
            random.Random(config.shuffle_seed).shuffle(order)
        self.mention_order = order
        self.mentions = {m.mention_id: m for m in order}

        scope = StoreScope.TOPIC if config.store_scope == "topic" else StoreScope.GLOBAL
        self.store = ArgumentStore(scope)
        self.decisions: list[Decision] = []
        self.decided: set[tuple[str, str, str]] = set()  # (mention, slot, annotator)
        for d in load_decisions(self.log_path):
            self._fold(d)

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "ServiceState":
        corpus_path = Path(config.corpus_path)
        corpus = ingest_corpus(corpus_path, config.dev_topics) if corpus_path.is_dir() else load_corpus(corpus_path)
        frames = load_frames(config.frames_path)
        return cls(corpus, frames, config)

    def _fold(self, d: Decision) -> None:
        mention = self.mentions[d.mention_id]
        apply_decision(self.store, d, self.provider.embed(mention.sentence_text), mention.topic_id)
        self.decisions.append(d)
        self.decided.add((d.mention_id, d.slot.value, d.annotator_id))

    @property
    def version(self) -> int:
        return len(self.decisions)

    # -- queue ------------------------------------------------------------

    def assigned(self, annotator: str, split: str | None) -> list[Mention]:
        roster = self.config.annotators
        out = []
        for i, m in enumerate(self.mention_order):
            if split and m.split != split:
                continue
            if self.config.assignment == "single" and roster[i % len(roster)] != annotator:
                continue
            out.append(m)
        return out

    def _needs_roleset(self, m: Mention, annotator: str) -> bool:
        return (m.mention_id, Slot.ROLESET.value, annotator) not in self.decided

    def _pending_arg_slots(self, m: Mention, annotator: str) -> list[Slot]:
        return [s for s in ARG_SLOTS if (m.mention_id, s.value, annotator) not in self.decided]

    def next_for(self, annotator: str, split: str | None) -> tuple[Mention, int] | None:
        assigned = self.assigned(annotator, split)
        if self.config.phase_mode == "interleaved":
            for m in assigned:
                if self._needs_roleset(m, annotator):
                    return m, PHASE_ROLESET
                if self._pending_arg_slots(m, annotator):
                    return m, PHASE_ARGUMENTS
            return None
        for m in assigned:
            if self._needs_roleset(m, annotator):
                return m, PHASE_ROLESET
        for m in assigned:
            if not self._needs_roleset(m, annotator) and self._pending_arg_slots(m, annotator):
                return m, PHASE_ARGUMENTS
        return None

    def mention_view(self, m: Mention, phase: int, annotator: str) -> dict:
        doc, sent = marked_views(m)
        if phase == PHASE_ROLESET:
            slots = [Slot.ROLESET]
        else:
            slots = self._pending_arg_slots(m, annotator)
        target = self.provider.embed(m.sentence_text)
        suggestions = {}
        defaults = {}
        for slot in slots:
            ranked = rank(self.store, slot, target, m.topic_id, self.config.suggestion_k)
            suggestions[slot.value] = [
                {"value": slot_value_to_json(slot, s.value), "score": s.score, "rank": s.rank}
                for s in ranked
            ]
            defaults[slot.value] = slot_value_to_json(slot, default_selection(ranked))
        return {
            "mention": mention_to_dict(m),
            "marked_document": doc,
            "marked_sentence": sent,
            "phase": phase,
            "slots": [s.value for s in slots],
            "suggestions": suggestions,
            "defaults": defaults,
            "store_version": self.version,
        }

    # -- writes -----------------------------------------------------------

    def record(self, d: Decision) -> int:
        with self.lock:
            if (d.mention_id, d.slot.value, d.annotator_id) in self.decided:
                raise DuplicateDecision()
            if d.slot in ARG_SLOTS and self._needs_roleset(self.mentions[d.mention_id], d.annotator_id):
                raise PhaseOrderViolation(
                    f"roleset decision must precede {d.slot.value} for {d.mention_id}"
                )
            append_decision(self.log_path, d)
            self._fold(d)
            return self.version

    def annotations(self):
        with self.lock:
            return decisions_to_annotations(list(self.decisions))

    def stats(self) -> dict:
        with self.lock:
            decisions = list(self.decisions)
        return {
            "corpus": corpus_stats(self.corpus, decisions_to_annotations(decisions)).to_json(),
            "acceptance": acceptance_ratios(decisions).to_json(),
            "decisions": len(decisions),
        }


class DuplicateDecision(XamrError):
    pass


class PhaseOrderViolation(XamrError):
    pass


def _parse_decision(body: dict) -> Decision:
    try:
        slot = Slot(body["slot"])
        ts = body.get("ts")
        timestamp = (
            datetime.fromisoformat(ts.replace("Z", "+00:00"))
            if ts
            else datetime.now(timezone.utc)
        )
        return Decision(
            mention_id=body["mention_id"],
            slot=slot,
            suggested=slot_value_from_json(slot, body.get("suggested")),
            action=DecisionAction(body["action"]),
            final=slot_value_from_json(slot, body.get("final")),
            annotator_id=body["annotator"],
            timestamp=timestamp,
        )
    except (KeyError, ValueError, TypeError, XamrError) as e:
        raise HTTPException(status_code=422, detail=f"invalid decision: {e}")


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="xamr annotation service")
    app.state.service = state

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "mentions": len(state.mentions), "decisions": state.version}

    @app.get("/api/session/next")
    def session_next(annotator: str = Query(...), split: str | None = Query(default=None)):
        if annotator not in state.config.annotators:
            raise HTTPException(status_code=400, detail=f"unknown annotator: {annotator}")
        nxt = state.next_for(annotator, split or state.config.split)
        if nxt is None:
            return Response(status_code=204)
        mention, phase = nxt
        return state.mention_view(mention, phase, annotator)

    @app.post("/api/decision", status_code=201)
    async def post_decision(request: Request):
        body = await request.json()
        if body.get("annotator") not in state.config.annotators:
            raise HTTPException(status_code=400, detail="unknown annotator")
        if body.get("mention_id") not in state.mentions:
            raise HTTPException(status_code=404, detail="unknown mention")
        decision = _parse_decision(body)
        try:
            version = state.record(decision)
        except DuplicateDecision:
            raise HTTPException(status_code=409, detail="decision already recorded for this mention/slot/annotator")
        except PhaseOrderViolation as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"store_version": version}

    @app.get("/api/frames/search")
    def frames_search(q: str = Query(default=""), k: int = Query(default=10, ge=1)):
        return [
            {
                "roleset_id": str(rs.id),
                "definition": rs.definition,
                "roles": [{"label": label, "description": desc} for label, desc in rs.roles],
                "aliases": list(rs.aliases),
            }
            for rs in search_rolesets(state.frames, q, k)
        ]

    @app.get("/api/frames/{roleset_id}")
    def frames_get(roleset_id: str):
        try:
            rs = state.frames.get(parse_roleset_id(roleset_id))
        except XamrError:
            rs = None
        if rs is None:
            raise HTTPException(status_code=404, detail=f"unknown roleset: {roleset_id}")
        return {
            "roleset_id": str(rs.id),
            "definition": rs.definition,
            "roles": [{"label": label, "description": desc} for label, desc in rs.roles],
            "aliases": list(rs.aliases),
        }

    @app.get("/api/mention/{mention_id}")
    def mention_get(mention_id: str):
        mention = state.mentions.get(mention_id)
        if mention is None:
            raise HTTPException(status_code=404, detail=f"unknown mention: {mention_id}")
        doc, sent = marked_views(mention)
        return {"mention": mention_to_dict(mention), "marked_document": doc, "marked_sentence": sent}

    @app.get("/api/stats")
    def stats():
        return JSONResponse(state.stats())

    @app.get("/api/annotations/export")
    def export():
        import json as _json

        lines = [_json.dumps(xamr_to_json(x), ensure_ascii=False) for x in state.annotations()]
        return PlainTextResponse("\n".join(lines) + ("\n" if lines else ""))

    ui_dir = state.config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    state = ServiceState.from_config(config)
    uvicorn.run(create_app(state), host="0.0.0.0", port=config.port)
