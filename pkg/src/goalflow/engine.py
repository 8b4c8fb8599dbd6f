"""Turn orchestration: ties NLU, retrieval, the FSM, tracking, QA, and
rendering into a single `handle_turn`, and owns the mutable repository,
retrieval index, and knowledge base with atomic swap semantics.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field, replace

from . import dialogue, dst, goals, nl2goal, nlu, qa, responses, retriever
from .config import AppConfig
from .dialogue import ActionKind, DialogueState, PolicyAction, SubState
from .dst import HistoryPair
from .goals import GoalWorkflow, Paradigm, Repository
from .llm import LLMGateway, build_provider
from .nlu import Intent, IntentLabel, QuestionKind
from .qa import AnswerBundle, KbIndex, OperationalStore
from .responses import TemplateSet

logger = logging.getLogger(__name__)

_SLOT_ACTIONS = frozenset(
    {ActionKind.REQUEST_SLOT, ActionKind.ANSWER_THEN_REQUEST_SLOT, ActionKind.SUMMARIZE_SLOTS}
)
_PENDING_LIKE = frozenset({SubState.AWAITING_QUERY, SubState.COMPLETED})


@dataclass
class Turn:
    index: int
    speaker: str  # "user" | "assistant"
    text: str
    intent: str | None = None
    action: str | None = None
    timestamp: float = 0.0

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "speaker": self.speaker,
            "text": self.text,
            "intent": self.intent,
            "action": self.action,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Turn:
        return cls(
            index=int(data["index"]),
            speaker=data["speaker"],
            text=data["text"],
            intent=data.get("intent"),
            action=data.get("action"),
            timestamp=float(data.get("timestamp", 0.0)),
        )


@dataclass
class Session:
    session_id: str
    created_at: float
    updated_at: float
    state: DialogueState = field(default_factory=DialogueState)
    turns: list[Turn] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "state": self.state.to_dict(),
            "turns": [t.to_dict() for t in self.turns],
        }

    @classmethod
    def from_dict(cls, data: dict, repo: Repository) -> Session:
        return cls(
            session_id=data["session_id"],
            created_at=float(data["created_at"]),
            updated_at=float(data["updated_at"]),
            state=DialogueState.from_dict(data["state"], repo),
            turns=[Turn.from_dict(t) for t in data.get("turns", [])],
        )


@dataclass
class TurnResult:
    reply: str
    state: DialogueState
    intent: Intent | None = None
    action: PolicyAction | None = None
    bundle: AnswerBundle | None = None
    turn_index: int = 0
    error: bool = False


class Engine:
    """One engine per process; sessions are passed in per call."""

    def __init__(
        self,
        repo: Repository,
        kb: KbIndex,
        op_store: OperationalStore,
        gateway: LLMGateway,
        templates: TemplateSet | None = None,
        keywords: nlu.KeywordLists = nlu.DEFAULT_KEYWORDS,
        retriever_config: retriever.RetrieverConfig | None = None,
    ):
        self.repo = repo
        self.kb = kb
        self.op_store = op_store
        self.gateway = gateway
        self.templates = templates or responses.default_templates()
        self.keywords = keywords
        self.retriever_config = retriever_config or retriever.RetrieverConfig()
        self.index = retriever.build_index(repo, config=self.retriever_config)
        self.router = nlu.HeuristicRouter(kb_scorer=lambda q: qa.top_score(self.kb, q))
        self.translator = nl2goal.GoalTranslator(gateway)
        self._mutate_lock = threading.Lock()

    @classmethod
    def from_config(cls, cfg: AppConfig) -> Engine:
        if cfg.goals_path.exists():
            repo = goals.load_repository(cfg.goals_path)
        else:
            repo = Repository(workflows={}, source=cfg.goals_path)
        kb_docs = qa.load_kb_dir(cfg.kb_dir) if cfg.kb_dir and cfg.kb_dir.is_dir() else []
        kb = qa.ingest(kb_docs)
        if cfg.operational_seed and cfg.operational_seed.exists():
            op_store = qa.load_store(cfg.operational_seed)
        else:
            op_store = qa.build_store({})
        gateway = LLMGateway(build_provider(cfg.provider, root=cfg.root))
        templates = (
            responses.load_templates(cfg.templates_path)
            if cfg.templates_path and cfg.templates_path.exists()
            else responses.default_templates()
        )
        keywords = (
            nlu.load_keywords(cfg.keywords_path)
            if cfg.keywords_path and cfg.keywords_path.exists()
            else nlu.DEFAULT_KEYWORDS
        )
        return cls(
            repo=repo,
            kb=kb,
            op_store=op_store,
            gateway=gateway,
            templates=templates,
            keywords=keywords,
            retriever_config=cfg.retriever,
        )

    # ------------------------------------------------------------- mutation

    def add_workflow(self, workflow: GoalWorkflow) -> None:
        """Add a goal and atomically swap in a rebuilt retrieval index."""
        with self._mutate_lock:
            new_repo = goals.add_workflow(self.repo, workflow)
            new_index = retriever.build_index(new_repo, config=self.retriever_config)
            self.repo = new_repo
            self.index = new_index

    def add_documents(self, docs: list[qa.Document]) -> None:
        with self._mutate_lock:
            self.kb = qa.ingest(list(self.kb.docs) + docs)

    def translate_goal(self, text: str) -> GoalWorkflow:
        return self.translator.translate(text)

    # ------------------------------------------------------------ turn loop

    def handle_turn(self, session: Session, utterance: str) -> TurnResult:
        """Run one dialogue turn; appends the user and assistant turns."""
        if not utterance or not utterance.strip():
            raise ValueError("utterance must be non-empty")
        utterance = utterance.strip()
        old_state = session.state
        history: list[HistoryPair] = [
            ("user" if t.speaker == "user" else "ai-assistant", t.text) for t in session.turns
        ]
        try:
            intent = nlu.classify(utterance, self.keywords)
            match_result = None
            if (
                intent.label in (IntentLabel.GOAL_TRIGGER, IntentLabel.QUESTION)
                and old_state.sub_state in _PENDING_LIKE
                and len(self.index)
            ):
                match_result = retriever.match(self.index, utterance)
            question_kind = (
                self.router.route(utterance) if intent.label == IntentLabel.QUESTION else None
            )

            new_state, action = dialogue.step(
                old_state, intent, match_result, self.repo, question_kind, utterance
            )
            if new_state.belief is not None and action.kind in _SLOT_ACTIONS:
                new_state, action = self._track(new_state, action, history, utterance)
            reply, new_state, bundle = self._render(
                action, new_state, history, utterance, question_kind
            )
        except Exception:
            logger.exception("turn failed; state preserved")
            reply = self.templates.render("apology")
            self._append(session, utterance, reply, None, None)
            return TurnResult(
                reply=reply, state=old_state, turn_index=len(session.turns) - 1, error=True
            )

        self._append(session, utterance, reply, intent, action)
        session.state = new_state
        return TurnResult(
            reply=reply,
            state=new_state,
            intent=intent,
            action=action,
            bundle=bundle,
            turn_index=len(session.turns) - 1,
        )

    def _track(
        self,
        state: DialogueState,
        action: PolicyAction,
        history: list[HistoryPair],
        utterance: str,
    ) -> tuple[DialogueState, PolicyAction]:
        """Update the belief and refine the slot action against it."""
        belief = dst.update(state.belief, history, utterance, self.gateway)
        if action.kind in (ActionKind.REQUEST_SLOT, ActionKind.ANSWER_THEN_REQUEST_SLOT):
            missing = belief.missing_required()
            if not missing:
                action = replace(action, kind=ActionKind.SUMMARIZE_SLOTS, slot=None)
                state = replace(state, sub_state=SubState.COMPLETED)
            else:
                action = replace(action, slot=missing[0])
        return replace(state, belief=belief), action

    def _answer(self, kind: QuestionKind | None, question: str) -> AnswerBundle:
        try:
            if kind == QuestionKind.PRODUCT_KNOWLEDGE:
                return qa.answer_product(question, self.kb, self.gateway)
            if kind == QuestionKind.OPERATIONAL_INSIGHTS:
                return qa.answer_operational(question, self.op_store)
        except Exception:
            logger.exception("qa failed; degrading to out-of-scope reply")
        return AnswerBundle(text=self.templates.render("out_of_scope"), tag="out_of_scope")

    def _render(
        self,
        action: PolicyAction,
        state: DialogueState,
        history: list[HistoryPair],
        utterance: str,
        question_kind: QuestionKind | None,
    ) -> tuple[str, DialogueState, AnswerBundle | None]:
        ts = self.templates
        kind = action.kind
        bundle: AnswerBundle | None = None

        if kind == ActionKind.PRESENT_OVERVIEW:
            reply = responses.render_overview(ts, self.repo.get(action.goal_id or state.active_goal))
        elif kind == ActionKind.PRESENT_STEP:
            reply = responses.render_step(ts, self.repo.get(action.goal_id), action.step_index)
        elif kind == ActionKind.ASK_TRANSITION:
            reply = responses.render_transition(
                ts, self.repo.get(action.goal_id), action.step_index, reask=action.reask
            )
        elif kind == ActionKind.CONFIRM_COMPLETION:
            reply = responses.render_completion(ts, self.repo.get(action.goal_id))
        elif kind == ActionKind.FAREWELL:
            reply = ts.render("farewell")
        elif kind == ActionKind.CLARIFY:
            reply = responses.render_clarify(ts, action.hint)
        elif kind in (ActionKind.ANSWER_QUESTION, ActionKind.FALLBACK_QA):
            routed = action.question_kind or question_kind or self.router.route(utterance)
            bundle = self._answer(routed, utterance)
            reply = responses.render_qa_text(ts, bundle)
            if state.sub_state in (SubState.PRESENTING_OVERVIEW, SubState.EXECUTING_STEP):
                workflow = self.repo.get(state.active_goal)
                reply += "\n" + responses.render_step_restate(ts, workflow, state.step_cursor)
        elif kind in _SLOT_ACTIONS:
            workflow = self.repo.get(state.active_goal)
            if kind == ActionKind.ANSWER_THEN_REQUEST_SLOT:
                routed = question_kind or self.router.route(utterance)
                bundle = self._answer(routed, utterance)
            reply, belief = responses.render_slotfilling(
                ts, self.gateway, workflow, state.belief, history, utterance, bundle
            )
            state = replace(state, belief=belief)
        else:
            raise AssertionError(f"unhandled action kind: {kind}")
        return reply, state, bundle

    @staticmethod
    def _append(
        session: Session,
        utterance: str,
        reply: str,
        intent: Intent | None,
        action: PolicyAction | None,
    ) -> None:
        now = time.time()
        session.turns.append(
            Turn(
                index=len(session.turns),
                speaker="user",
                text=utterance,
                intent=intent.label.value if intent else None,
                timestamp=now,
            )
        )
        session.turns.append(
            Turn(
                index=len(session.turns),
                speaker="assistant",
                text=reply,
                action=action.kind.value if action else None,
                timestamp=now,
            )
        )
        session.updated_at = now


def workflow_summary(workflow: GoalWorkflow) -> dict:
    """JSON-friendly view of one workflow for listings and the UI."""
    data: dict = {
        "id": workflow.id,
        "goal": workflow.goal,
        "paradigm": workflow.paradigm.value,
    }
    if workflow.paradigm == Paradigm.GUIDANCE:
        data["steps"] = [
            {"index": s.index, "name": s.name, "description": s.description}
            for s in workflow.steps
        ]
    else:
        data["slots"] = [
            {
                "name": s.name,
                "description": s.description,
                "required": s.required,
                "pattern": s.pattern,
            }
            for s in workflow.slots
        ]
    return data
