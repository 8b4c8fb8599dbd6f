"""Intent recognition and question routing.

Classification is keyword-driven with a fixed precedence: commands beat
sentiment, sentiment beats question detection, and anything left over is
treated as a candidate goal query for the retriever to judge. Sentiment
and termination keywords only fire on short utterances so that "yes, how
many datasets do I have" is not swallowed by the affirmative list.

Question routing is pluggable; the default router is a two-rule
heuristic over an operational-noun lexicon and the knowledge-base
retrieval score.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable

from .qa_types import detect_object_type
from .text import tokenize


class IntentLabel(str, Enum):
    ACKNOWLEDGE = "acknowledge"
    NEGATION = "negation"
    GOAL_TRIGGER = "goal_trigger"
    NAVIGATION = "navigation"
    TASK_COMPLETION = "task_completion"
    STOP = "stop"
    QUESTION = "question"


class NavDirection(str, Enum):
    PREV = "prev"
    NEXT = "next"
    REPEAT = "repeat"
    GOTO_STEP = "goto_step"


class QuestionKind(str, Enum):
    PRODUCT_KNOWLEDGE = "product_knowledge"
    OPERATIONAL_INSIGHTS = "operational_insights"
    OUT_OF_SCOPE = "out_of_scope"


@dataclass(frozen=True)
class Intent:
    label: IntentLabel
    confidence: float
    evidence: str = ""
    direction: NavDirection | None = None
    step_number: int | None = None  # 1-based, for goto


@dataclass(frozen=True)
class KeywordLists:
    """Per-label phrase lists; defaults are the built-in taxonomy."""

    acknowledge: tuple[str, ...] = (
        "yes", "yeah", "yep", "sure", "ok", "okay", "correct", "sounds good", "please do", "confirm",
    )
    negation: tuple[str, ...] = ("no", "nope", "not now", "cancel", "don't", "never mind")
    stop: tuple[str, ...] = ("stop", "quit", "exit", "goodbye", "bye")
    task_completion: tuple[str, ...] = ("done", "finished", "completed", "i'm done", "all set")
    nav_next: tuple[str, ...] = ("next",)
    nav_prev: tuple[str, ...] = ("previous", "go back", "back")
    nav_repeat: tuple[str, ...] = ("repeat", "again")


DEFAULT_KEYWORDS = KeywordLists()

_SECTION_RE = re.compile(r"^\[([a-z_]+)\]$")


def load_keywords(path: Path | str) -> KeywordLists:
    """Read phrase lists from a file of `[label]` sections, one phrase per line."""
    sections: dict[str, list[str]] = {}
    current: str | None = None
    for raw_line in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        m = _SECTION_RE.match(line)
        if m:
            current = m.group(1)
            sections.setdefault(current, [])
        elif current is not None:
            sections[current].append(line.lower())
    kwargs = {}
    for field_name in KeywordLists.__dataclass_fields__:
        if field_name in sections:
            kwargs[field_name] = tuple(sections[field_name])
    return KeywordLists(**kwargs)


_WS_RE = re.compile(r"\s+")
_GOTO_RE = re.compile(r"\bstep\s+(\d+)\b")

_INTERROGATIVES = frozenset(
    "what how why when where which who can could should is are do does".split()
)


def _normalize(utterance: str) -> str:
    return _WS_RE.sub(" ", utterance.strip().lower())


def _phrase_re(phrase: str) -> re.Pattern[str]:
    return re.compile(r"\b" + re.escape(phrase).replace(r"\ ", r"\s+") + r"\b")


def _find_phrase(text: str, phrases: tuple[str, ...]) -> str | None:
    for phrase in phrases:
        if _phrase_re(phrase).search(text):
            return phrase
    return None


def classify(utterance: str, keywords: KeywordLists = DEFAULT_KEYWORDS) -> Intent:
    """Label an utterance; precedence is Stop > Navigation > TaskCompletion >
    Negation/Acknowledge > question form > goal-trigger fallthrough."""
    if not utterance or not utterance.strip():
        raise ValueError("utterance must be non-empty")
    text = _normalize(utterance)
    short = len(tokenize(text, drop_stopwords=False)) <= 4

    if short:
        hit = _find_phrase(text, keywords.stop)
        if hit:
            return Intent(IntentLabel.STOP, 1.0, hit)

    goto = _GOTO_RE.search(text)
    if goto:
        return Intent(
            IntentLabel.NAVIGATION, 1.0, goto.group(0),
            direction=NavDirection.GOTO_STEP, step_number=int(goto.group(1)),
        )
    for phrases, direction in (
        (keywords.nav_prev, NavDirection.PREV),
        (keywords.nav_next, NavDirection.NEXT),
        (keywords.nav_repeat, NavDirection.REPEAT),
    ):
        hit = _find_phrase(text, phrases)
        if hit:
            return Intent(IntentLabel.NAVIGATION, 1.0, hit, direction=direction)

    if short:
        hit = _find_phrase(text, keywords.task_completion)
        if hit:
            return Intent(IntentLabel.TASK_COMPLETION, 1.0, hit)
        hit = _find_phrase(text, keywords.negation)
        if hit:
            return Intent(IntentLabel.NEGATION, 1.0, hit)
        hit = _find_phrase(text, keywords.acknowledge)
        if hit:
            return Intent(IntentLabel.ACKNOWLEDGE, 1.0, hit)

    if text.endswith("?"):
        return Intent(IntentLabel.QUESTION, 0.9, "?")
    first = text.split(" ", 1)[0].split("'", 1)[0]
    if first in _INTERROGATIVES:
        return Intent(IntentLabel.QUESTION, 0.9, first)

    return Intent(IntentLabel.GOAL_TRIGGER, 0.5)


_COUNTING_CUES = (re.compile(r"\bhow\s+many\b"), re.compile(r"\bcount\b"), re.compile(r"\blist\b"))
_WHICH_HAVE_RE = re.compile(r"\bwhich\b.*\bhave\b")


def has_operational_cue(question: str) -> bool:
    text = _normalize(question)
    return any(c.search(text) for c in _COUNTING_CUES) or bool(_WHICH_HAVE_RE.search(text))


class HeuristicRouter:
    """Default three-way question router.

    Rule 1: count/lookup cue plus a metadata-type noun -> operational.
    Rule 2: knowledge-base top hit scores at least `kb_threshold` -> product.
    Otherwise out of scope. `kb_scorer` maps a question to the KB's best
    lexical score; without one, rule 2 never fires.
    """

    def __init__(self, kb_scorer: Callable[[str], float] | None = None, kb_threshold: float = 0.2):
        self.kb_scorer = kb_scorer
        self.kb_threshold = kb_threshold

    def route(self, question: str) -> QuestionKind:
        tokens = tokenize(question, drop_stopwords=False)
        if has_operational_cue(question) and detect_object_type(tokens) is not None:
            return QuestionKind.OPERATIONAL_INSIGHTS
        if self.kb_scorer is not None and self.kb_scorer(question) >= self.kb_threshold:
            return QuestionKind.PRODUCT_KNOWLEDGE
        return QuestionKind.OUT_OF_SCOPE


def route_question(question: str, router: HeuristicRouter) -> QuestionKind:
    """Delegate to the configured router; total over non-empty strings."""
    if not question or not question.strip():
        raise ValueError("question must be non-empty")
    return router.route(question)
