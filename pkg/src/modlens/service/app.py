"""HTTP surface for the moderation queue.

JSON API:
  POST /comments {id, text, metadata?}            -> 201 entry
  GET  /queue?limit&min_p&status                  -> entry list
  GET  /comments/{id}                             -> entry
  POST /comments/{id}/decision {action, reason?}  -> entry
  GET  /health                                    -> liveness payload
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from typing import Literal

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .scoring import CommentScorer
from .store import (
    DecisionConflict,
    DuplicateComment,
    InvalidComment,
    InvalidDecision,
    ModerationStore,
    ServiceError,
    UnknownComment,
)

_STATUS_CODES = {
    InvalidComment: 400,
    InvalidDecision: 400,
    UnknownComment: 404,
    DuplicateComment: 409,
    DecisionConflict: 409,
}


class IngestRequest(BaseModel):
    id: str = Field(min_length=1)
    text: str = Field(min_length=1)
    metadata: dict[str, str] = Field(default_factory=dict)


class DecisionRequest(BaseModel):
    action: Literal["approve", "block"]
    reason: str | None = None
    decided_by: str | None = None


def create_app(store: ModerationStore, scorer: CommentScorer) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        # Snapshot on clean shutdown so restart replays a short journal.
        store.write_snapshot()
        store.close()

    app = FastAPI(title="moderation queue", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.scorer = scorer

    @app.exception_handler(ServiceError)
    async def service_error(_: Request, exc: ServiceError) -> JSONResponse:
        code = _STATUS_CODES.get(type(exc), 400)
        return JSONResponse(status_code=code, content={"detail": str(exc)})

    @app.post("/comments", status_code=201)
    def ingest(body: IngestRequest) -> dict:
        scored = scorer.score(body.text)
        entry = store.ingest(
            id=body.id,
            text=body.text,
            probability=scored.probability,
            spans=scored.spans,
            metadata=body.metadata,
        )
        return entry.to_record()

    @app.get("/queue")
    def fetch_queue(
        limit: int | None = Query(default=None, ge=1),
        min_p: float | None = Query(default=None, ge=0.0, le=1.0),
        status: str | None = Query(default=None),
    ) -> list[dict]:
        rows = store.queue(limit=limit, min_probability=min_p, status=status)
        return [e.to_record() for e in rows]

    @app.get("/comments/{comment_id}")
    def fetch_comment(comment_id: str) -> dict:
        return store.get(comment_id).to_record()

    @app.post("/comments/{comment_id}/decision")
    def decide(comment_id: str, body: DecisionRequest) -> dict:
        entry = store.decide(
            comment_id,
            action=body.action,
            reason=body.reason,
            decided_by=body.decided_by,
        )
        return entry.to_record()

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "entries": len(store)}

    return app
