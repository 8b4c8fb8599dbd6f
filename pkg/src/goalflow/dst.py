"""Belief state and per-turn dialogue state tracking.

The model path renders the slot-capture prompt and parses a JSON object
out of the reply; non-empty values overwrite, empty values never clobber.
When the gateway is unavailable or the reply is unparseable, a
deterministic extractor takes over: regex-pattern slots first, then the
whole utterance into whichever slot was last requested.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, replace

from .goals import GoalWorkflow, SlotSpec
from .llm import GatewayError, LLMGateway

logger = logging.getLogger(__name__)

HistoryPair = tuple[str, str]  # (speaker, text); speaker in {"user", "ai-assistant"}


@dataclass(frozen=True)
class BeliefState:
    """Slot values for one slot-filling workflow; empty string = unfilled."""

    workflow_id: str
    slots: tuple[SlotSpec, ...]
    values: dict[str, str]
    last_requested_slot: str | None = None

    def filled(self) -> dict[str, str]:
        return {name: v for name, v in self.values.items() if v}

    def missing_required(self) -> list[str]:
        return [s.name for s in self.slots if s.required and not self.values[s.name]]

    @property
    def is_complete(self) -> bool:
        return not self.missing_required()

    def with_values(self, new_values: dict[str, str]) -> BeliefState:
        merged = dict(self.values)
        for name, value in new_values.items():
            if name not in merged:
                logger.debug("ignoring unknown slot key %r", name)
                continue
            if value:
                merged[name] = value
        return replace(self, values=merged)

    def with_last_requested(self, slot: str | None) -> BeliefState:
        return replace(self, last_requested_slot=slot)


def new_belief(workflow: GoalWorkflow) -> BeliefState:
    if not workflow.slots:
        raise ValueError(f"workflow {workflow.id!r} has no slots")
    return BeliefState(
        workflow_id=workflow.id,
        slots=workflow.slots,
        values={s.name: "" for s in workflow.slots},
    )


def format_history(history: list[HistoryPair]) -> str:
    """Conversation lines in the `<<speaker>>:` form the prompts expect."""
    return "\n".join(f"<<{speaker}>>: {text}" for speaker, text in history)


def format_slot_lines(slots: tuple[SlotSpec, ...]) -> str:
    lines = []
    for s in slots:
        lines.append(f"{s.name}: {s.description}" if s.description else s.name)
    return "\n".join(lines)


def _first_json_object(text: str) -> str | None:
    start = text.find("{")
    while start != -1:
        depth = 0
        in_str = esc = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_str:
                if esc:
                    esc = False
                elif ch == "\\":
                    esc = True
                elif ch == '"':
                    in_str = False
            elif ch == '"':
                in_str = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start : i + 1]
        start = text.find("{", start + 1)
    return None


def parse_slot_json(text: str) -> dict[str, str]:
    """First balanced JSON object in the text, values coerced to strings."""
    block = _first_json_object(text)
    if block is None:
        raise ValueError("no JSON object in model output")
    data = json.loads(block)
    if not isinstance(data, dict):
        raise ValueError("model output JSON is not an object")
    return {str(k): "" if v is None else str(v).strip() for k, v in data.items()}


def fallback_extract(belief: BeliefState, utterance: str) -> BeliefState:
    """Deterministic extraction: pattern slots, then the last-requested slot."""
    text = utterance.strip()
    extracted: dict[str, str] = {}
    for slot in belief.slots:
        if slot.pattern and not belief.values[slot.name]:
            m = re.search(slot.pattern, text)
            if m:
                extracted[slot.name] = m.group(0)
    if not extracted:
        target = belief.last_requested_slot
        if target and target in belief.values and not belief.values[target]:
            spec = next((s for s in belief.slots if s.name == target), None)
            # A slot that declares a pattern only accepts matching text, so a
            # non-matching utterance leaves it open rather than polluting it.
            if spec is not None and not spec.pattern:
                extracted[target] = text
    return belief.with_values(extracted)


def update(
    belief: BeliefState,
    history: list[HistoryPair],
    utterance: str,
    llm: LLMGateway,
) -> BeliefState:
    """One tracking turn; returns a new belief, the input is untouched."""
    try:
        reply = llm.complete(
            "dst",
            slots=format_slot_lines(belief.slots),
            chat_history=format_history(history),
            current_utterance=utterance,
        )
    except GatewayError:
        logger.debug("gateway unavailable for tracking, using fallback extractor")
        return fallback_extract(belief, utterance)
    try:
        values = parse_slot_json(reply)
    except (ValueError, json.JSONDecodeError) as exc:
        logger.warning("unparseable tracking output (%s), using fallback extractor", exc)
        return fallback_extract(belief, utterance)
    return belief.with_values(values)
