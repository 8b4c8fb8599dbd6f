"""Natural-language goal descriptions to structured workflows.

The preferred path renders the ``nl2goal`` prompt and parses the model's
YAML reply. When no provider is configured (or the scripted fixture has no
matching rule) a rule-based enumeration parser takes over: it splits the
paragraph on step markers such as "first, ...", "Step 2:", "3." or "3)"
appearing at a clause boundary.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

import yaml

from .goals import GoalWorkflow, Step, validate_workflow
from .llm import GatewayUnavailable, LLMGateway
from .text import slugify

logger = logging.getLogger(__name__)

_ORDINALS = ("first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth")

_MARKER_RE = re.compile(
    r"(?i)(?:\bstep\s+(?P<stepnum>\d{1,2})\s*[:.]\s*"
    r"|\b(?P<ordinal>" + "|".join(_ORDINALS) + r")\b\s*,?\s+"
    r"|(?<![\w.])(?P<num>\d{1,2})[.)]\s+)"
)

_CONNECTOR_RE = re.compile(r"(?i)\b(?:and|then|or)$")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?;]")


class Nl2GoalError(Exception):
    """Translation failed; carries the raw model text when one was produced."""

    def __init__(self, message: str, raw: str | None = None):
        self.raw = raw
        super().__init__(message)


@dataclass(frozen=True)
class _Marker:
    start: int
    body_start: int
    number: int | None  # explicit step number when the marker carried one


def _is_clause_boundary(prefix: str) -> bool:
    """True when text before a marker ends a clause (so the marker starts one)."""
    p = prefix.rstrip(" \t")
    if not p:
        return True
    m = _CONNECTOR_RE.search(p)
    if m:
        p = p[: m.start()].rstrip(" \t")
        if p.endswith(","):
            p = p[:-1].rstrip(" \t")
    if not p:
        return True
    return p[-1] in ".;:!?\n"


def _find_markers(text: str) -> list[_Marker]:
    markers: list[_Marker] = []
    for m in _MARKER_RE.finditer(text):
        if not _is_clause_boundary(text[: m.start()]):
            continue
        number: int | None = None
        if m.group("stepnum"):
            number = int(m.group("stepnum"))
        elif m.group("num"):
            number = int(m.group("num"))
        elif m.group("ordinal"):
            number = _ORDINALS.index(m.group("ordinal").lower()) + 1
        markers.append(_Marker(start=m.start(), body_start=m.end(), number=number))
    return markers


_CONNECTOR_ONLY_RE = re.compile(r"(?i)^(?:and|then|or|also|finally|next)[\s,.;]*$")


def _split_name(body: str) -> tuple[str, str]:
    """First clause as the step name, remainder as its description."""
    body = body.strip()
    m = _SENTENCE_SPLIT_RE.search(body)
    if m is None:
        name, rest = body, ""
    else:
        name, rest = body[: m.start()], body[m.end() :]
    name = name.strip().rstrip(",")
    rest = rest.strip()
    if _CONNECTOR_ONLY_RE.match(rest):
        rest = ""
    if name:
        name = name[0].upper() + name[1:]
    return name, rest if rest else name


_GOAL_LEAD_RE = re.compile(
    r"(?i)^(?:i\s+(?:have\s+a\s+goal|want|need|would\s+like)\s+to\s+|my\s+goal\s+is\s+to\s+|the\s+goal\s+is\s+to\s+|goal:\s*)"
)


def _extract_goal(preamble: str, full_text: str) -> str:
    source = preamble.strip().rstrip(":;,. \t\n") or full_text.strip()
    m = _SENTENCE_SPLIT_RE.search(source)
    sentence = source[: m.start()] if m else source
    sentence = _GOAL_LEAD_RE.sub("", sentence.strip())
    sentence = sentence.strip().rstrip(".")
    if sentence:
        sentence = sentence[0].upper() + sentence[1:] + "."
    return sentence


def parse_enumeration(text: str, workflow_id: str | None = None) -> GoalWorkflow:
    """Rule-based translation of an enumerated goal paragraph."""
    text = text.strip()
    if not text:
        raise Nl2GoalError("empty goal description")

    markers = _find_markers(text)
    if markers:
        # Only the preamble can carry the goal; a text that opens with its
        # first marker gets a neutral goal instead of marker text.
        goal = _extract_goal(text[: markers[0].start], "")
        if not goal:
            goal = "Work through the listed steps."
    else:
        goal = _extract_goal(text, text)

    steps: list[Step] = []
    if markers:
        for i, marker in enumerate(markers):
            end = markers[i + 1].start if i + 1 < len(markers) else len(text)
            name, description = _split_name(text[marker.body_start : end])
            if not name:
                continue
            if marker.number is not None and marker.number != len(steps) + 1:
                logger.warning(
                    "step marker says %d but lands at position %d", marker.number, len(steps) + 1
                )
            steps.append(Step(index=len(steps), name=name, description=description))
    if not steps:
        name, description = _split_name(text)
        steps = [Step(index=0, name=name, description=description)]

    wid = workflow_id or slugify(goal or text)
    workflow = GoalWorkflow(id=wid, goal=goal or text, steps=tuple(steps))
    violations = validate_workflow(workflow)
    if violations:
        raise Nl2GoalError("parsed workflow is invalid: " + "; ".join(str(v) for v in violations))
    return workflow


_FENCE_RE = re.compile(r"^```[a-zA-Z]*\n|\n?```\s*$")


def workflow_from_yaml(yaml_text: str, workflow_id: str | None = None) -> GoalWorkflow:
    """Parse a single-workflow YAML document (as returned by the model)."""
    cleaned = _FENCE_RE.sub("", yaml_text.strip())
    try:
        data = yaml.safe_load(cleaned)
    except yaml.YAMLError as exc:
        raise Nl2GoalError(f"model output is not valid YAML: {exc}", raw=yaml_text) from exc

    if isinstance(data, dict) and "workflow" in data:
        entries = data["workflow"]
    elif isinstance(data, list):
        entries = data
    elif isinstance(data, dict):
        entries = [data]
    else:
        raise Nl2GoalError("model output is not a workflow document", raw=yaml_text)
    if not isinstance(entries, list) or not entries or not isinstance(entries[0], dict):
        raise Nl2GoalError("model output holds no workflow entry", raw=yaml_text)

    entry = entries[0]
    goal = str(entry.get("goal") or "").strip()
    steps = []
    for i, raw in enumerate(entry.get("steps") or []):
        if not isinstance(raw, dict):
            raise Nl2GoalError(f"step {i} is not a mapping", raw=yaml_text)
        steps.append(
            Step(
                index=i,
                name=str(raw.get("name") or "").strip(),
                description=str(raw.get("description") or "").strip(),
            )
        )
    wid = workflow_id or str(entry.get("id") or "").strip() or slugify(goal)
    workflow = GoalWorkflow(id=wid, goal=goal, steps=tuple(steps))
    violations = validate_workflow(workflow)
    if violations:
        raise Nl2GoalError(
            "model output fails workflow validation: " + "; ".join(str(v) for v in violations),
            raw=yaml_text,
        )
    return workflow


class GoalTranslator:
    """Turns a goal paragraph into a workflow, via the model when possible."""

    def __init__(self, gateway: LLMGateway | None = None):
        self.gateway = gateway

    def translate(self, text: str, workflow_id: str | None = None) -> GoalWorkflow:
        text = text.strip()
        if not text:
            raise Nl2GoalError("empty goal description")
        if self.gateway is not None and self.gateway.enabled:
            try:
                reply = self.gateway.complete("nl2goal", new_goal=text)
            except GatewayUnavailable:
                logger.info("model unavailable for goal translation, using rule-based parser")
            else:
                return workflow_from_yaml(reply, workflow_id=workflow_id)
        return parse_enumeration(text, workflow_id=workflow_id)


def translate_to_yaml(translator: GoalTranslator, text: str) -> str:
    """Translate and serialize as a one-entry repository document."""
    from .goals import Repository, serialize_repository

    workflow = translator.translate(text)
    return serialize_repository(Repository(workflows={workflow.id: workflow}))


__all__ = [
    "GoalTranslator",
    "Nl2GoalError",
    "parse_enumeration",
    "translate_to_yaml",
    "workflow_from_yaml",
]
