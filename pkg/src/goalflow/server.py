"""HTTP JSON service: sessions and chat turns, goal repository management,
goal translation, KB ingestion and search, health. Wire schemas live here
as pydantic models; everything else delegates to the engine.
"""

from __future__ import annotations

import logging

import yaml
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from . import goals, qa
from .dialogue import DialogueState
from .engine import Engine, Session, TurnResult, workflow_summary
from .goals import DuplicateIdError, Paradigm, RepositoryParseError, SchemaError
from .nl2goal import Nl2GoalError
from .store import SessionNotFound, SessionStore

logger = logging.getLogger(__name__)


class MessageIn(BaseModel):
    text: str = ""


class IntentOut(BaseModel):
    label: str
    confidence: float
    evidence: str = ""
    direction: str | None = None
    step_number: int | None = None


class ActionOut(BaseModel):
    kind: str
    goal_id: str | None = None
    step_index: int | None = None
    slot: str | None = None
    question_kind: str | None = None


class StateOut(BaseModel):
    phase: str
    sub_state: str
    active_goal: str | None = None
    step_cursor: int | None = None
    skipped_steps: list[int] = Field(default_factory=list)
    proposed_goal: str | None = None
    proposed_step: int | None = None


class SlotOut(BaseModel):
    name: str
    description: str = ""
    required: bool = True
    value: str | None = None
    filled: bool = False


class BeliefOut(BaseModel):
    workflow_id: str
    slots: list[SlotOut]
    missing: list[str]
    last_requested_slot: str | None = None
    complete: bool = False


class StepOut(BaseModel):
    index: int
    number: int
    total: int
    name: str
    description: str = ""
    steps: list[str]
    skipped: list[int] = Field(default_factory=list)


class SqlOut(BaseModel):
    text: str
    explanation: str = ""


class TurnResponse(BaseModel):
    session_id: str
    turn_index: int
    reply: str
    intent: IntentOut | None = None
    action: ActionOut | None = None
    state: StateOut
    belief: BeliefOut | None = None
    step: StepOut | None = None
    citations: list[str] | None = None
    sql: SqlOut | None = None
    error: bool = False


class SessionView(BaseModel):
    session_id: str
    created_at: float
    updated_at: float
    state: StateOut
    belief: BeliefOut | None = None
    step: StepOut | None = None
    turns: list[dict]


class DocumentIn(BaseModel):
    doc_id: str
    title: str = ""
    body: str
    source_uri: str = ""


def _state_out(state: DialogueState) -> StateOut:
    return StateOut(
        phase=state.phase.value,
        sub_state=state.sub_state.value,
        active_goal=state.active_goal,
        step_cursor=state.step_cursor,
        skipped_steps=sorted(state.skipped_steps),
        proposed_goal=state.proposed_goal,
        proposed_step=state.proposed_step,
    )


def _belief_out(state: DialogueState) -> BeliefOut | None:
    belief = state.belief
    if belief is None:
        return None
    values = belief.values
    return BeliefOut(
        workflow_id=belief.workflow_id,
        slots=[
            SlotOut(
                name=s.name,
                description=s.description,
                required=s.required,
                value=values.get(s.name) or None,
                filled=bool(values.get(s.name, "").strip()),
            )
            for s in belief.slots
        ],
        missing=belief.missing_required(),
        last_requested_slot=belief.last_requested_slot,
        complete=belief.is_complete,
    )


def _step_out(state: DialogueState, engine: Engine) -> StepOut | None:
    if state.active_goal is None or state.step_cursor is None:
        return None
    try:
        workflow = engine.repo.get(state.active_goal)
    except KeyError:
        return None
    if workflow.paradigm != Paradigm.GUIDANCE or not workflow.steps:
        return None
    cursor = min(state.step_cursor, len(workflow.steps) - 1)
    current = workflow.steps[cursor]
    return StepOut(
        index=cursor,
        number=cursor + 1,
        total=len(workflow.steps),
        name=current.name,
        description=current.description,
        steps=[s.name for s in workflow.steps],
        skipped=sorted(state.skipped_steps),
    )


def _turn_response(session: Session, result: TurnResult, engine: Engine) -> TurnResponse:
    intent = None
    if result.intent is not None:
        intent = IntentOut(
            label=result.intent.label.value,
            confidence=result.intent.confidence,
            evidence=result.intent.evidence,
            direction=result.intent.direction.value if result.intent.direction else None,
            step_number=result.intent.step_number,
        )
    action = None
    if result.action is not None:
        action = ActionOut(
            kind=result.action.kind.value,
            goal_id=result.action.goal_id,
            step_index=result.action.step_index,
            slot=result.action.slot,
            question_kind=result.action.question_kind.value
            if result.action.question_kind
            else None,
        )
    citations = None
    sql = None
    if result.bundle is not None:
        if result.bundle.citations:
            citations = list(result.bundle.citations)
        if result.bundle.sql_text:
            sql = SqlOut(text=result.bundle.sql_text, explanation=result.bundle.sql_explanation or "")
    return TurnResponse(
        session_id=session.session_id,
        turn_index=result.turn_index,
        reply=result.reply,
        intent=intent,
        action=action,
        state=_state_out(result.state),
        belief=_belief_out(result.state),
        step=_step_out(result.state, engine),
        citations=citations,
        sql=sql,
        error=result.error,
    )


def create_app(engine: Engine, store: SessionStore) -> FastAPI:
    app = FastAPI(title="goalflow", docs_url=None, redoc_url=None)
    # the browser client is served as a static page from any origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.post("/sessions")
    def create_session() -> dict:
        session = store.create()
        return {"session_id": session.session_id, "state": _state_out(session.state).model_dump()}

    @app.get("/sessions/{session_id}", response_model=SessionView)
    def get_session(session_id: str) -> SessionView:
        try:
            session = store.load(session_id)
        except SessionNotFound:
            raise HTTPException(status_code=404, detail="unknown session") from None
        return SessionView(
            session_id=session.session_id,
            created_at=session.created_at,
            updated_at=session.updated_at,
            state=_state_out(session.state),
            belief=_belief_out(session.state),
            step=_step_out(session.state, engine),
            turns=[t.to_dict() for t in session.turns],
        )

    @app.post("/sessions/{session_id}/messages", response_model=TurnResponse)
    def post_message(session_id: str, message: MessageIn) -> TurnResponse:
        if not message.text or not message.text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")
        if not store.exists(session_id):
            raise HTTPException(status_code=404, detail="unknown session")
        if not store.try_acquire(session_id):
            raise HTTPException(status_code=409, detail="a turn is already in flight")
        try:
            session = store.load(session_id)
            result = engine.handle_turn(session, message.text)
            store.save(session)
        except SessionNotFound:
            raise HTTPException(status_code=404, detail="unknown session") from None
        finally:
            store.release(session_id)
        return _turn_response(session, result, engine)

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str) -> dict:
        try:
            session = store.load(session_id)
        except SessionNotFound:
            raise HTTPException(status_code=404, detail="unknown session") from None
        return {
            "session_id": session.session_id,
            "created_at": session.created_at,
            "updated_at": session.updated_at,
            "turn_count": len(session.turns),
            "state": session.state.to_dict(),
            "turns": [t.to_dict() for t in session.turns],
        }

    @app.get("/goals")
    def list_goals() -> dict:
        return {"goals": [workflow_summary(w) for w in engine.repo]}

    @app.post("/goals")
    async def add_goals(request: Request) -> dict:
        raw = (await request.body()).decode("utf-8")
        try:
            data = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise HTTPException(status_code=422, detail={"violations": [{"code": "ParseError", "message": str(exc)}]}) from exc
        if isinstance(data, dict) and "workflow" in data:
            doc = data
        elif isinstance(data, list):
            doc = {"workflow": data}
        elif isinstance(data, dict):
            doc = {"workflow": [data]}
        else:
            raise HTTPException(
                status_code=422,
                detail={"violations": [{"code": "BadShape", "message": "expected a workflow mapping or list"}]},
            )
        try:
            incoming = goals.parse_repository(yaml.safe_dump(doc, sort_keys=False))
        except RepositoryParseError as exc:
            raise HTTPException(status_code=422, detail={"violations": [{"code": "ParseError", "message": str(exc)}]}) from exc
        except SchemaError as exc:
            raise HTTPException(
                status_code=422,
                detail={"violations": [{"code": v.code, "message": v.message, "path": v.path} for v in exc.violations]},
            ) from exc
        added = []
        try:
            for workflow in incoming:
                engine.add_workflow(workflow)
                added.append(workflow.id)
        except DuplicateIdError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"added": added, "goal_count": len(engine.repo.workflows)}

    @app.post("/goals/translate", response_class=PlainTextResponse)
    async def translate_goal(request: Request) -> str:
        text = (await request.body()).decode("utf-8").strip()
        if not text:
            raise HTTPException(status_code=400, detail="body must be non-empty")
        try:
            workflow = engine.translate_goal(text)
        except Nl2GoalError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        repo = goals.Repository(workflows={workflow.id: workflow}, source=None)
        return goals.serialize_repository(repo)

    @app.post("/kb/documents")
    def ingest_documents(documents: list[DocumentIn]) -> dict:
        docs = [
            qa.Document(doc_id=d.doc_id, title=d.title, body=d.body, source_uri=d.source_uri)
            for d in documents
        ]
        try:
            engine.add_documents(docs)
        except qa.DuplicateDocError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except qa.QaError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"ingested": len(docs), "kb_doc_count": len(engine.kb.docs)}

    @app.get("/kb/search")
    def search_kb(q: str = "") -> dict:
        if not q.strip():
            return {"hits": []}
        hits = qa.search(engine.kb, q)
        return {
            "hits": [
                {"doc_id": doc.doc_id, "title": doc.title, "score": round(score, 4)}
                for doc, score in hits
            ]
        }

    @app.get("/healthz")
    def healthz() -> dict:
        return {
            "status": "ok",
            "goal_count": len(engine.repo.workflows),
            "kb_doc_count": len(engine.kb.docs),
            "provider_kind": engine.gateway.kind,
        }

    return app
