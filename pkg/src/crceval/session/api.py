"""HTTP face of the session service.

Local-network tool: auth is a per-session token returned at creation and
required on every subsequent call.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from .core import SessionError, SessionService, ValidationError


class CreateSessionBody(BaseModel):
    evaluator_id: str
    kind: str
    case_ids: list[str]
    seed: int = 0


class SubmitBody(BaseModel):
    token: str
    case_id: str
    payload: dict


class TokenBody(BaseModel):
    token: str


def build_app(service: SessionService) -> FastAPI:
    app = FastAPI(title="crceval session service")

    def checked(session_id: str, token: Optional[str]) -> None:
        try:
            state = service.state_of(session_id)
        except SessionError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        if token != state.token:
            raise HTTPException(status_code=403, detail="bad session token")

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            state = service.create_session(
                body.evaluator_id, body.kind, body.case_ids, body.seed
            )
        except SessionError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "session_id": state.session_id,
            "token": state.token,
            "case_count": len(state.case_order),
        }

    @app.get("/sessions/{session_id}/next")
    def next_case(session_id: str, token: str = Query(...)):
        checked(session_id, token)
        try:
            view = service.next_case(session_id)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        if view is None:
            return {"done": True}
        return {"done": False, "case": view}

    @app.post("/sessions/{session_id}/submit")
    def submit(session_id: str, body: SubmitBody):
        checked(session_id, body.token)
        try:
            record = service.submit(session_id, body.case_id, body.payload)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=exc.errors)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"record": record, "state": service.state_of(session_id).state}

    @app.post("/sessions/{session_id}/pause")
    def pause(session_id: str, body: TokenBody):
        checked(session_id, body.token)
        try:
            return {"state": service.pause(session_id)}
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.post("/sessions/{session_id}/resume")
    def resume(session_id: str, body: TokenBody):
        checked(session_id, body.token)
        try:
            return {"state": service.resume(session_id)}
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str, token: str = Query(...)):
        checked(session_id, token)
        return {"records": service.export(session_id)}

    return app
