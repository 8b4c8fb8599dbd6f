"""Response rendering.

Guidance actions compose fixed templates; slot-filling turns go through
the model prompt with deterministic fallbacks; QA answers are formatted
from their bundles. Step names may end with a period in the repository,
so renderers strip it and let the template supply punctuation.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .dst import BeliefState, HistoryPair, format_history
from .goals import GoalWorkflow
from .llm import GatewayError, LLMGateway
from .qa import AnswerBundle

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATES: dict[str, str] = {
    "overview": (
        "Let's work on: {goal}\n"
        "Here is an overview of the {total} steps:\n"
        "{step_lines}\n"
        "\n"
        "Starting with Step 1: {first_name}. {first_description}\n"
        "Say next when you're ready to continue."
    ),
    "step": "Step {number} of {total}: {name}. {description}",
    "transition_question": (
        "That's covered by Step {step_number} ({step_name}) of a bigger goal: {goal}\n"
        "Would you like to {goal_action}? (yes/no) "
        "If yes, we'll skip Step {step_number} since you've already covered it."
    ),
    "reask_transition": "Sorry, I need a quick yes or no: would you like to {goal_action}? (yes/no)",
    "completion": "That completes the goal: {goal} Nice work! Is there anything else I can help you with?",
    "farewell": "Goodbye! Come back any time you need a hand.",
    "out_of_scope": (
        "I'm not able to help with that one. I can guide you through platform "
        "tasks or answer product and data questions."
    ),
    "clarify": (
        "{hint}You can say next, previous, or repeat; ask a question; or tell "
        "me what you'd like to work on."
    ),
    "slot_request_fallback": "Could you share the {slot}?",
    "slot_summary_fallback": "Here is what I have: {pairs}. Your request has been recorded.",
    "step_restate": "We're on Step {number} of {total}: {name}.",
    "apology": "Sorry, something went wrong on my side. Could you try that again?",
}

_SECTION_RE = re.compile(r"^\[([a-z_]+)\]$")


@dataclass(frozen=True)
class TemplateSet:
    templates: dict[str, str]

    def render(self, name: str, /, **values: str) -> str:
        text = self.templates[name]
        for key, value in values.items():
            text = text.replace("{" + key + "}", str(value))
        return text


def default_templates() -> TemplateSet:
    return TemplateSet(dict(DEFAULT_TEMPLATES))


def load_templates(path: Path | str) -> TemplateSet:
    """Overlay `[name]` sections from a template asset file onto the defaults."""
    merged = dict(DEFAULT_TEMPLATES)
    current: str | None = None
    body: list[str] = []

    def flush() -> None:
        if current is not None:
            merged[current] = "\n".join(body).rstrip("\n")

    for line in Path(path).read_text(encoding="utf-8").splitlines():
        m = _SECTION_RE.match(line.strip())
        if m:
            flush()
            current = m.group(1)
            body = []
        elif current is not None:
            body.append(line)
    flush()
    return TemplateSet(merged)


def _clean(name: str) -> str:
    return name.strip().rstrip(".")


_LEADING_VERBS = frozenset(
    "perform create delete configure set build clean resolve remove fix run "
    "review update migrate export import check investigate verify list".split()
)


def goal_action_phrase(goal: str) -> str:
    """The goal text as an infinitive clause for `Would you like to ...?`."""
    text = goal.strip().rstrip(".")
    if not text:
        return "continue"
    lowered = text[0].lower() + text[1:]
    if lowered.split(" ", 1)[0] in _LEADING_VERBS:
        return lowered
    return "work on " + lowered


def render_overview(ts: TemplateSet, workflow: GoalWorkflow) -> str:
    step_lines = "\n".join(f"Step {s.index + 1}: {_clean(s.name)}." for s in workflow.steps)
    first = workflow.steps[0]
    return ts.render(
        "overview",
        goal=workflow.goal,
        total=len(workflow.steps),
        step_lines=step_lines,
        first_name=_clean(first.name),
        first_description=first.description,
    )


def render_step(ts: TemplateSet, workflow: GoalWorkflow, index: int) -> str:
    step = workflow.steps[index]
    return ts.render(
        "step",
        number=index + 1,
        total=len(workflow.steps),
        name=_clean(step.name),
        description=step.description,
    )


def render_transition(
    ts: TemplateSet, workflow: GoalWorkflow, step_index: int, reask: bool = False
) -> str:
    action = goal_action_phrase(workflow.goal)
    if reask:
        return ts.render("reask_transition", goal_action=action)
    step = workflow.steps[step_index]
    return ts.render(
        "transition_question",
        step_number=step_index + 1,
        step_name=_clean(step.name),
        goal=workflow.goal,
        goal_action=action,
    )


def render_completion(ts: TemplateSet, workflow: GoalWorkflow) -> str:
    return ts.render("completion", goal=workflow.goal)


def render_step_restate(ts: TemplateSet, workflow: GoalWorkflow, index: int) -> str:
    step = workflow.steps[index]
    return ts.render(
        "step_restate", number=index + 1, total=len(workflow.steps), name=_clean(step.name)
    )


def render_clarify(ts: TemplateSet, hint: str = "") -> str:
    if hint and not hint.endswith(" "):
        hint = hint + " "
    return ts.render("clarify", hint=hint)


def render_qa_text(ts: TemplateSet, bundle: AnswerBundle) -> str:
    """Bundle to user text: answer, then SQL with its explanation, then sources."""
    parts = [bundle.text]
    if bundle.sql_text:
        parts.append(f"SQL: {bundle.sql_text}")
    if bundle.sql_explanation:
        parts.append(f"Explanation: {bundle.sql_explanation}")
    if bundle.citations:
        parts.append("Sources: " + ", ".join(bundle.citations))
    return "\n".join(parts)


def _first_mentioned(text: str, names: list[str]) -> str | None:
    lower = text.lower()
    best: tuple[int, str] | None = None
    for name in names:
        position = lower.find(name.lower())
        if position >= 0 and (best is None or position < best[0]):
            best = (position, name)
    return best[1] if best else None


def _summary_pairs(belief: BeliefState) -> str:
    return "; ".join(f"{s.name}: {belief.values[s.name]}" for s in belief.slots if belief.values[s.name])


def render_slotfilling(
    ts: TemplateSet,
    llm: LLMGateway | None,
    workflow: GoalWorkflow,
    belief: BeliefState,
    history: list[HistoryPair],
    utterance: str,
    qa_bundle: AnswerBundle | None = None,
) -> tuple[str, BeliefState]:
    """Slot request / summary text plus the belief with last_requested updated."""
    missing = belief.missing_required()
    text: str | None = None

    if llm is not None and llm.enabled:
        filled = belief.filled()
        try:
            text = llm.complete(
                "slotfill_rg",
                task=workflow.goal,
                filled_slots="\n".join(f"{k}: {v}" for k, v in filled.items()) or "(none)",
                missing_slots="\n".join(missing) or "(none)",
                chat_history=format_history(history),
                current_utterance=utterance,
            ).strip()
        except GatewayError:
            logger.debug("gateway unavailable for slot response, using templates")
            text = None
        if text is not None and "<ANSWER>" in text:
            replacement = qa_bundle.text if qa_bundle is not None else ""
            text = text.replace("<ANSWER>", replacement).strip()

    if text is None:
        prefix = f"{qa_bundle.text} " if qa_bundle is not None else ""
        if missing:
            text = prefix + ts.render("slot_request_fallback", slot=missing[0])
        else:
            text = prefix + ts.render("slot_summary_fallback", pairs=_summary_pairs(belief))

    if missing:
        requested = _first_mentioned(text, missing) or missing[0]
        return text, belief.with_last_requested(requested)
    return text, belief.with_last_requested(None)
