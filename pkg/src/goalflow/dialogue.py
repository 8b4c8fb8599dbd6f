"""The hierarchical dialogue state machine.

Two phases, six sub-states. The pending phase waits for a query and
handles goal-transition proposals; the execution phase walks guidance
steps or collects slots. `step` is a pure transition function returning
the successor state and a single policy action; it is total over every
(state, intent, match) combination, falling back to a clarification
action rather than dead-ending.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .dst import BeliefState, new_belief
from .goals import GoalWorkflow, Paradigm, Repository
from .nlu import Intent, IntentLabel, NavDirection, QuestionKind
from .retriever import MatchKind, MatchResult


class Phase(str, Enum):
    GOAL_PENDING = "goal_pending"
    GOAL_EXECUTION = "goal_execution"


class SubState(str, Enum):
    AWAITING_QUERY = "awaiting_query"
    PROPOSING_TRANSITION = "proposing_transition"
    PRESENTING_OVERVIEW = "presenting_overview"
    EXECUTING_STEP = "executing_step"
    COLLECTING_SLOTS = "collecting_slots"
    COMPLETED = "completed"


_PENDING_STATES = frozenset({SubState.AWAITING_QUERY, SubState.PROPOSING_TRANSITION})


class ActionKind(str, Enum):
    PRESENT_OVERVIEW = "present_overview"
    PRESENT_STEP = "present_step"
    ASK_TRANSITION = "ask_transition"
    ANSWER_QUESTION = "answer_question"
    REQUEST_SLOT = "request_slot"
    SUMMARIZE_SLOTS = "summarize_slots"
    ANSWER_THEN_REQUEST_SLOT = "answer_then_request_slot"
    CONFIRM_COMPLETION = "confirm_completion"
    FAREWELL = "farewell"
    FALLBACK_QA = "fallback_qa"
    CLARIFY = "clarify"


@dataclass(frozen=True)
class PolicyAction:
    kind: ActionKind
    goal_id: str | None = None
    step_index: int | None = None
    slot: str | None = None
    question_kind: QuestionKind | None = None
    hint: str = ""
    reask: bool = False


@dataclass(frozen=True)
class DialogueState:
    sub_state: SubState = SubState.AWAITING_QUERY
    active_goal: str | None = None
    step_cursor: int | None = None
    skipped_steps: frozenset[int] = field(default_factory=frozenset)
    proposed_goal: str | None = None
    proposed_step: int | None = None
    proposal_reasks: int = 0
    belief: BeliefState | None = None

    @property
    def phase(self) -> Phase:
        return Phase.GOAL_PENDING if self.sub_state in _PENDING_STATES else Phase.GOAL_EXECUTION

    def to_dict(self) -> dict:
        data: dict = {
            "phase": self.phase.value,
            "sub_state": self.sub_state.value,
            "active_goal": self.active_goal,
            "step_cursor": self.step_cursor,
            "skipped_steps": sorted(self.skipped_steps),
            "proposed_goal": self.proposed_goal,
            "proposed_step": self.proposed_step,
            "proposal_reasks": self.proposal_reasks,
        }
        if self.belief is not None:
            data["belief"] = {
                "workflow_id": self.belief.workflow_id,
                "values": dict(self.belief.values),
                "last_requested_slot": self.belief.last_requested_slot,
            }
        else:
            data["belief"] = None
        return data

    @classmethod
    def from_dict(cls, data: dict, repo: Repository) -> DialogueState:
        belief = None
        raw_belief = data.get("belief")
        if raw_belief is not None:
            workflow = repo.get(raw_belief["workflow_id"])
            belief = new_belief(workflow)
            belief = belief.with_values(
                {k: v for k, v in raw_belief.get("values", {}).items() if v}
            ).with_last_requested(raw_belief.get("last_requested_slot"))
        return cls(
            sub_state=SubState(data["sub_state"]),
            active_goal=data.get("active_goal"),
            step_cursor=data.get("step_cursor"),
            skipped_steps=frozenset(data.get("skipped_steps", [])),
            proposed_goal=data.get("proposed_goal"),
            proposed_step=data.get("proposed_step"),
            proposal_reasks=data.get("proposal_reasks", 0),
            belief=belief,
        )


INITIAL_STATE = DialogueState()


def _cleared() -> DialogueState:
    return DialogueState()


def _next_unskipped(workflow: GoalWorkflow, index: int, skipped: frozenset[int]) -> int | None:
    j = index + 1
    while j < len(workflow.steps) and j in skipped:
        j += 1
    return j if j < len(workflow.steps) else None


def _prev_unskipped(workflow: GoalWorkflow, index: int, skipped: frozenset[int]) -> int | None:
    j = index - 1
    while j >= 0 and j in skipped:
        j -= 1
    return j if j >= 0 else None


def _first_unskipped(workflow: GoalWorkflow, skipped: frozenset[int]) -> int | None:
    j = 0
    while j < len(workflow.steps) and j in skipped:
        j += 1
    return j if j < len(workflow.steps) else None


def _enter_goal(workflow: GoalWorkflow) -> tuple[DialogueState, PolicyAction]:
    if workflow.paradigm == Paradigm.GUIDANCE:
        state = DialogueState(
            sub_state=SubState.PRESENTING_OVERVIEW, active_goal=workflow.id, step_cursor=0
        )
        return state, PolicyAction(ActionKind.PRESENT_OVERVIEW, goal_id=workflow.id)
    belief = new_belief(workflow)
    state = DialogueState(
        sub_state=SubState.COLLECTING_SLOTS, active_goal=workflow.id, belief=belief
    )
    return state, PolicyAction(
        ActionKind.REQUEST_SLOT, goal_id=workflow.id, slot=belief.missing_required()[0]
    )


def _accept_proposal(state: DialogueState, repo: Repository) -> tuple[DialogueState, PolicyAction]:
    workflow = repo.get(state.proposed_goal)
    skipped = frozenset({state.proposed_step})
    first = _first_unskipped(workflow, skipped)
    if first is None:
        done = DialogueState(
            sub_state=SubState.COMPLETED,
            active_goal=workflow.id,
            step_cursor=state.proposed_step,
            skipped_steps=skipped,
        )
        return done, PolicyAction(ActionKind.CONFIRM_COMPLETION, goal_id=workflow.id)
    nxt = DialogueState(
        sub_state=SubState.EXECUTING_STEP,
        active_goal=workflow.id,
        step_cursor=first,
        skipped_steps=skipped,
    )
    return nxt, PolicyAction(ActionKind.PRESENT_STEP, goal_id=workflow.id, step_index=first)


def _pending_turn(
    intent: Intent, match: MatchResult | None, repo: Repository, question_kind: QuestionKind | None
) -> tuple[DialogueState, PolicyAction]:
    """Shared handling for AwaitingQuery (and a finished goal's next turn)."""
    base = _cleared()
    if intent.label == IntentLabel.STOP:
        return base, PolicyAction(ActionKind.FAREWELL)
    if intent.label in (IntentLabel.GOAL_TRIGGER, IntentLabel.QUESTION):
        if match is not None and match.kind == MatchKind.HIGH_LEVEL:
            return _enter_goal(repo.get(match.goal_id))
        if match is not None and match.kind == MatchKind.SUB_GOAL:
            state = DialogueState(
                sub_state=SubState.PROPOSING_TRANSITION,
                proposed_goal=match.goal_id,
                proposed_step=match.step_index,
            )
            return state, PolicyAction(
                ActionKind.ASK_TRANSITION, goal_id=match.goal_id, step_index=match.step_index
            )
        if intent.label == IntentLabel.QUESTION:
            return base, PolicyAction(ActionKind.ANSWER_QUESTION, question_kind=question_kind)
        return base, PolicyAction(ActionKind.FALLBACK_QA)
    return base, PolicyAction(ActionKind.CLARIFY)


def _proposing_turn(
    state: DialogueState, intent: Intent, repo: Repository
) -> tuple[DialogueState, PolicyAction]:
    if intent.label == IntentLabel.ACKNOWLEDGE:
        return _accept_proposal(state, repo)
    if intent.label == IntentLabel.NEGATION:
        return _cleared(), PolicyAction(ActionKind.CLARIFY, hint="No problem.")
    if intent.label == IntentLabel.STOP:
        return _cleared(), PolicyAction(ActionKind.FAREWELL)
    if state.proposal_reasks == 0:
        reasked = replace(state, proposal_reasks=1)
        return reasked, PolicyAction(
            ActionKind.ASK_TRANSITION,
            goal_id=state.proposed_goal,
            step_index=state.proposed_step,
            reask=True,
        )
    return _cleared(), PolicyAction(ActionKind.CLARIFY, hint="No problem.")


def _advance(
    state: DialogueState, workflow: GoalWorkflow
) -> tuple[DialogueState, PolicyAction]:
    nxt = _next_unskipped(workflow, state.step_cursor, state.skipped_steps)
    if nxt is None:
        done = replace(state, sub_state=SubState.COMPLETED)
        return done, PolicyAction(ActionKind.CONFIRM_COMPLETION, goal_id=workflow.id)
    moved = replace(state, sub_state=SubState.EXECUTING_STEP, step_cursor=nxt)
    return moved, PolicyAction(ActionKind.PRESENT_STEP, goal_id=workflow.id, step_index=nxt)


def _goto(
    state: DialogueState, workflow: GoalWorkflow, step_number: int | None
) -> tuple[DialogueState, PolicyAction]:
    index = (step_number or 0) - 1
    if index < 0 or index >= len(workflow.steps):
        return state, PolicyAction(ActionKind.CLARIFY, hint="That step number doesn't exist.")
    if index in state.skipped_steps:
        return state, PolicyAction(
            ActionKind.CLARIFY, hint=f"Step {index + 1} was already covered, so we skip it."
        )
    moved = replace(state, sub_state=SubState.EXECUTING_STEP, step_cursor=index)
    return moved, PolicyAction(ActionKind.PRESENT_STEP, goal_id=workflow.id, step_index=index)


def _guidance_turn(
    state: DialogueState,
    intent: Intent,
    repo: Repository,
    question_kind: QuestionKind | None,
) -> tuple[DialogueState, PolicyAction]:
    """PresentingOverview and ExecutingStep share most transitions."""
    workflow = repo.get(state.active_goal)
    overview = state.sub_state == SubState.PRESENTING_OVERVIEW

    if intent.label == IntentLabel.STOP:
        return _cleared(), PolicyAction(ActionKind.FAREWELL)
    if intent.label == IntentLabel.TASK_COMPLETION:
        done = replace(state, sub_state=SubState.COMPLETED)
        return done, PolicyAction(ActionKind.CONFIRM_COMPLETION, goal_id=workflow.id)
    if intent.label == IntentLabel.QUESTION:
        return state, PolicyAction(ActionKind.ANSWER_QUESTION, question_kind=question_kind)
    if intent.label == IntentLabel.ACKNOWLEDGE:
        return _advance(state, workflow)
    if intent.label == IntentLabel.NAVIGATION:
        if intent.direction == NavDirection.NEXT:
            return _advance(state, workflow)
        if intent.direction == NavDirection.GOTO_STEP:
            return _goto(state, workflow, intent.step_number)
        if intent.direction == NavDirection.PREV:
            if overview:
                return state, PolicyAction(ActionKind.PRESENT_OVERVIEW, goal_id=workflow.id)
            prev = _prev_unskipped(workflow, state.step_cursor, state.skipped_steps)
            index = prev if prev is not None else state.step_cursor
            moved = replace(state, step_cursor=index)
            return moved, PolicyAction(
                ActionKind.PRESENT_STEP, goal_id=workflow.id, step_index=index
            )
        # repeat
        if overview:
            return state, PolicyAction(ActionKind.PRESENT_OVERVIEW, goal_id=workflow.id)
        return state, PolicyAction(
            ActionKind.PRESENT_STEP, goal_id=workflow.id, step_index=state.step_cursor
        )
    # Negation or a fresh goal-trigger while mid-goal: ask for direction.
    return state, PolicyAction(ActionKind.CLARIFY)


def _collecting_turn(
    state: DialogueState, intent: Intent, repo: Repository
) -> tuple[DialogueState, PolicyAction]:
    workflow = repo.get(state.active_goal)
    belief = state.belief

    if intent.label == IntentLabel.STOP:
        return _cleared(), PolicyAction(ActionKind.FAREWELL)
    if intent.label == IntentLabel.TASK_COMPLETION:
        done = replace(state, sub_state=SubState.COMPLETED)
        return done, PolicyAction(ActionKind.CONFIRM_COMPLETION, goal_id=workflow.id)

    missing = belief.missing_required()
    if not missing:
        done = replace(state, sub_state=SubState.COMPLETED)
        return done, PolicyAction(ActionKind.SUMMARIZE_SLOTS, goal_id=workflow.id)
    if intent.label == IntentLabel.QUESTION:
        return state, PolicyAction(
            ActionKind.ANSWER_THEN_REQUEST_SLOT, goal_id=workflow.id, slot=missing[0]
        )
    return state, PolicyAction(ActionKind.REQUEST_SLOT, goal_id=workflow.id, slot=missing[0])


def step(
    state: DialogueState,
    intent: Intent,
    match: MatchResult | None,
    repo: Repository,
    question_kind: QuestionKind | None = None,
    utterance: str = "",
) -> tuple[DialogueState, PolicyAction]:
    """One transition; total over all (state, intent, match) combinations."""
    if state.sub_state in (SubState.AWAITING_QUERY, SubState.COMPLETED):
        return _pending_turn(intent, match, repo, question_kind)
    if state.sub_state == SubState.PROPOSING_TRANSITION:
        return _proposing_turn(state, intent, repo)
    if state.sub_state in (SubState.PRESENTING_OVERVIEW, SubState.EXECUTING_STEP):
        return _guidance_turn(state, intent, repo, question_kind)
    if state.sub_state == SubState.COLLECTING_SLOTS:
        return _collecting_turn(state, intent, repo)
    raise AssertionError(f"unhandled sub-state: {state.sub_state}")
