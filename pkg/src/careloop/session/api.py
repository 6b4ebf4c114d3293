"""HTTP+JSON surface over the session manager.

Optional static-token auth: when CARELOOP_API_TOKEN is set (or a token is
passed explicitly) every request must carry `Authorization: Bearer <token>`.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from careloop.core.render import plan_to_markdown
from careloop.errors import SessionError, UnknownSessionError, VisitLimitError
from careloop.session.manager import SessionManager

ENV_API_TOKEN = "CARELOOP_API_TOKEN"


class MessageIn(BaseModel):
    text: str = Field(min_length=1)


class ReportIn(BaseModel):
    provider: str = ""
    intervention: str = ""
    result: str = ""


class AdvanceIn(BaseModel):
    reports: list[ReportIn] = Field(default_factory=list)


class SessionIn(BaseModel):
    scenario: dict = Field(default_factory=dict)


def create_app(manager: SessionManager, token: str | None = None, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="careloop session service")
    # local tool: allow the chat client to run from any origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    expected = token if token is not None else os.environ.get(ENV_API_TOKEN)

    def check_auth(request: Request) -> None:
        if not expected:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {expected}":
            raise HTTPException(status_code=401, detail="missing or invalid token")

    auth = Depends(check_auth)

    def session_or_404(session_id: str):
        try:
            return manager.get_session(session_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}") from None

    @app.post("/sessions", dependencies=[auth])
    def create_session(body: SessionIn):
        session_id = manager.create_session(body.scenario)
        session = manager.get_session(session_id)
        return {
            "session_id": session_id,
            "scenario": session.scenario,
            "visit_number": session.state.visit_number,
            "status": session.status,
        }

    @app.get("/sessions", dependencies=[auth])
    def list_sessions():
        out = []
        for session_id in manager.session_ids():
            session = session_or_404(session_id)
            out.append(
                {
                    "session_id": session_id,
                    "scenario": session.scenario,
                    "visit_number": session.state.visit_number,
                    "status": session.status,
                }
            )
        return {"sessions": out}

    @app.post("/sessions/{session_id}/messages", dependencies=[auth])
    def post_message(session_id: str, body: MessageIn):
        session_or_404(session_id)
        try:
            reply = manager.post_message(session_id, body.text)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        session = manager.get_session(session_id)
        return {
            "reply": reply,
            "visit_number": session.state.visit_number,
            "status": session.status,
            "visit_closeable": session.visit_closeable,
        }

    @app.post("/sessions/{session_id}/advance", dependencies=[auth])
    def advance(session_id: str, body: AdvanceIn):
        session_or_404(session_id)
        try:
            visit = manager.advance_visit(session_id, [r.model_dump() for r in body.reports])
        except VisitLimitError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"visit_number": visit}

    @app.post("/sessions/{session_id}/close", dependencies=[auth])
    def close(session_id: str):
        session_or_404(session_id)
        try:
            status = manager.close_visit(session_id)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"status": status}

    @app.get("/sessions/{session_id}/state", dependencies=[auth])
    def get_state(session_id: str):
        session = session_or_404(session_id)
        return {
            "session_id": session.session_id,
            "scenario": session.scenario,
            "status": session.status,
            "visit_number": session.state.visit_number,
            "visit_closeable": session.visit_closeable,
            "summary": session.state.summary.to_dict(),
            "differential": session.state.differential.to_dict(),
            "plan_timestamp": session.state.plan_timestamp,
        }

    @app.get("/sessions/{session_id}/transcript", dependencies=[auth])
    def get_transcript(session_id: str):
        session = session_or_404(session_id)
        return {"messages": session.transcript.to_dict()}

    @app.get("/sessions/{session_id}/plan", dependencies=[auth])
    def get_plan(session_id: str):
        session = session_or_404(session_id)
        plan = session.state.plan
        return {
            "plan": plan.to_dict() if plan else None,
            "plan_timestamp": session.state.plan_timestamp,
            "markdown": plan_to_markdown(plan) if plan else None,
        }

    @app.get("/sessions/{session_id}/questionnaire", dependencies=[auth])
    def get_questionnaire(session_id: str):
        session_or_404(session_id)
        try:
            questionnaire = manager.export_questionnaire(session_id)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return questionnaire.to_dict()

    @app.get("/guidelines/{doc_id}", dependencies=[auth])
    def get_guideline(doc_id: str):
        index = manager.index
        if index is None or doc_id not in index.corpus:
            raise HTTPException(status_code=404, detail=f"unknown guideline {doc_id}")
        doc = index.doc(doc_id)
        return {
            "doc_id": doc.doc_id,
            "corpus": doc.corpus.value,
            "title": doc.title,
            "abstract": doc.abstract,
        }

    return app
