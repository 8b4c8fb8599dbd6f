"""Question answering over product documentation and operational metadata.

Product-knowledge questions run against an inverted-index document store
(same tokenizer as goal retrieval) with an extractive fallback when no
model is available. Operational-insight questions are translated by a
closed pattern grammar into one of four query shapes, executed against an
in-process metadata store, and answered with the SQL text and a plain
explanation alongside the result.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .llm import GatewayError, LLMGateway
from .qa_types import OPERATIONAL_TYPES, detect_object_type
from .text import token_set, tokenize

logger = logging.getLogger(__name__)


class QaError(Exception):
    pass


class DuplicateDocError(QaError):
    def __init__(self, doc_id: str):
        super().__init__(f"document id already ingested: {doc_id!r}")


# ---------------------------------------------------------------- product KB


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    body: str
    source_uri: str = ""


@dataclass(frozen=True)
class KbIndex:
    """Immutable inverted index over title+body tokens."""

    docs: tuple[Document, ...]
    token_sets: tuple[frozenset[str], ...]
    postings: dict[str, tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.docs)


def ingest(corpus: list[Document]) -> KbIndex:
    seen: set[str] = set()
    token_sets: list[frozenset[str]] = []
    postings: dict[str, list[int]] = {}
    for position, doc in enumerate(corpus):
        if doc.doc_id in seen:
            raise DuplicateDocError(doc.doc_id)
        if not doc.body.strip():
            raise QaError(f"document {doc.doc_id!r} has an empty body")
        seen.add(doc.doc_id)
        tokens = token_set(f"{doc.title} {doc.body}")
        token_sets.append(tokens)
        for token in tokens:
            postings.setdefault(token, []).append(position)
    return KbIndex(
        docs=tuple(corpus),
        token_sets=tuple(token_sets),
        postings={t: tuple(ps) for t, ps in postings.items()},
    )


def load_kb_dir(path: Path | str) -> list[Document]:
    """Directory of UTF-8 text files: filename stem = id, first line = title."""
    docs: list[Document] = []
    for file in sorted(Path(path).glob("*.txt")):
        text = file.read_text(encoding="utf-8")
        first, _, rest = text.partition("\n")
        docs.append(
            Document(doc_id=file.stem, title=first.strip(), body=rest.strip(), source_uri=str(file))
        )
    return docs


def search(kb: KbIndex, query: str, k: int = 3) -> list[tuple[Document, float]]:
    """Top-k docs by query-normalized token overlap, ties by corpus order."""
    query_tokens = token_set(query)
    if not query_tokens or not kb.docs:
        return []
    hits: dict[int, int] = {}
    for token in query_tokens:
        for position in kb.postings.get(token, ()):
            hits[position] = hits.get(position, 0) + 1
    scored = [
        (count / len(query_tokens), position) for position, count in hits.items()
    ]
    scored.sort(key=lambda item: (-item[0], item[1]))
    return [(kb.docs[position], score) for score, position in scored[:k]]


def top_score(kb: KbIndex, query: str) -> float:
    results = search(kb, query, k=1)
    return results[0][1] if results else 0.0


@dataclass(frozen=True)
class AnswerBundle:
    text: str
    citations: tuple[str, ...] = ()
    sql_text: str | None = None
    sql_explanation: str | None = None
    grounded: bool = False
    tag: str | None = None


_TROUBLESHOOT_CUES = ("error", "fail", "failing", "broken", "fix", "issue", "problem", "cannot", "can't")
_POINTED_CUES = ("what is", "what are", "define", "definition", "meaning")


def _question_tag(question: str) -> str:
    q = question.lower()
    if any(cue in q for cue in _TROUBLESHOOT_CUES):
        return "troubleshooting"
    if any(cue in q for cue in _POINTED_CUES):
        return "pointed_learning"
    return "open_discovery"


def _grounding_overlap(answer: str, passages: list[str]) -> float:
    answer_tokens = token_set(answer)
    if not answer_tokens:
        return 0.0
    passage_tokens: set[str] = set()
    for p in passages:
        passage_tokens |= token_set(p)
    return len(answer_tokens & passage_tokens) / len(answer_tokens)


def answer_product(question: str, kb: KbIndex, llm: LLMGateway | None = None) -> AnswerBundle:
    """Retrieve top passages and answer, extractively when no model responds."""
    results = search(kb, question, k=3)
    tag = _question_tag(question)
    if not results:
        return AnswerBundle(
            text="I couldn't find anything in the documentation about that.",
            grounded=False,
            tag=tag,
        )
    passages = [doc.body for doc, _ in results]
    citations = tuple(doc.doc_id for doc, _ in results)

    if llm is not None and llm.enabled:
        try:
            rendered_passages = "\n\n".join(
                f"[{doc.doc_id}] {doc.title}\n{doc.body}" for doc, _ in results
            )
            answer = llm.complete(
                "product_qa", passages=rendered_passages, question=question
            ).strip()
        except GatewayError:
            answer = ""
        if answer and answer != "UNKNOWN":
            grounded = _grounding_overlap(answer, passages) >= 0.5
            return AnswerBundle(text=answer, citations=citations, grounded=grounded, tag=tag)
        if answer == "UNKNOWN":
            return AnswerBundle(
                text="I couldn't find anything in the documentation about that.",
                grounded=False,
                tag=tag,
            )

    best_doc = results[0][0]
    return AnswerBundle(text=best_doc.body, citations=(best_doc.doc_id,), grounded=True, tag=tag)


# ---------------------------------------------------------- operational store


@dataclass(frozen=True)
class Row:
    id: str
    name: str
    created_at: str = ""


@dataclass(frozen=True)
class Edge:
    from_type: str
    from_id: str
    to_type: str
    to_id: str


@dataclass(frozen=True)
class OperationalStore:
    """One table per metadata type plus the reference edges between rows."""

    tables: dict[str, tuple[Row, ...]] = field(default_factory=dict)
    edges: tuple[Edge, ...] = ()

    def rows(self, type_name: str) -> tuple[Row, ...]:
        return self.tables.get(type_name, ())

    def incoming(self, type_name: str, row_id: str) -> list[Edge]:
        return [e for e in self.edges if e.to_type == type_name and e.to_id == row_id]

    def unused_rows(self, type_name: str) -> list[Row]:
        referenced = {e.to_id for e in self.edges if e.to_type == type_name}
        return [r for r in self.rows(type_name) if r.id not in referenced]


def build_store(data: dict) -> OperationalStore:
    tables: dict[str, tuple[Row, ...]] = {}
    for type_name in OPERATIONAL_TYPES:
        rows = []
        for raw in data.get(type_name, []):
            rows.append(
                Row(
                    id=str(raw["id"]),
                    name=str(raw.get("name", "")),
                    created_at=str(raw.get("created_at", "")),
                )
            )
        tables[type_name] = tuple(rows)
    ids = {t: {r.id for r in rows} for t, rows in tables.items()}
    edges = []
    for raw in data.get("edges", []):
        edge = Edge(
            from_type=str(raw["from_type"]),
            from_id=str(raw["from_id"]),
            to_type=str(raw["to_type"]),
            to_id=str(raw["to_id"]),
        )
        for endpoint_type, endpoint_id in ((edge.from_type, edge.from_id), (edge.to_type, edge.to_id)):
            if endpoint_type not in ids:
                raise QaError(f"edge references unknown type {endpoint_type!r}")
            if endpoint_id not in ids[endpoint_type]:
                raise QaError(f"edge references missing row {endpoint_type}/{endpoint_id}")
        edges.append(edge)
    return OperationalStore(tables=tables, edges=tuple(edges))


def load_store(path: Path | str) -> OperationalStore:
    return build_store(json.loads(Path(path).read_text(encoding="utf-8")))


# ------------------------------------------------------- pattern translation


_UNUSED_RE = re.compile(r"\bnever\s+been\s+used\b|\bunused\b")
_COUNT_RE = re.compile(r"\bhow\s+many\b|\bcount\b")
_LIST_RE = re.compile(r"\blist\b|\bshow\b|\bwhich\b")
_REFERENCE_RE = re.compile(r"\breferences?\b|\breferencing\b|\breferenced\b")
_QUOTED_RE = re.compile(r"['\"]([^'\"]+)['\"]")
_ID_TOKEN_RE = re.compile(r"\b([a-z]{2}-\d+)\b")

LIST_LIMIT = 10


def _find_entity(question: str, store: OperationalStore, type_name: str | None):
    """Resolve a quoted name or bare row id to (type, row)."""
    candidates: list[str] = []
    m = _QUOTED_RE.search(question)
    if m:
        candidates.append(m.group(1).strip().lower())
    candidates.extend(t.lower() for t in _ID_TOKEN_RE.findall(question.lower()))
    search_types = [type_name] if type_name else list(OPERATIONAL_TYPES)
    for candidate in candidates:
        for t in search_types:
            for row in store.rows(t):
                if row.id.lower() == candidate or row.name.lower() == candidate:
                    return t, row
    return None


def _unsupported(question: str) -> AnswerBundle:
    kinds = ", ".join(OPERATIONAL_TYPES)
    return AnswerBundle(
        text=(
            "I can answer operational questions that count objects, list them, "
            "count unused ones, or list references to a named object, over these "
            f"types: {kinds}. Try something like 'How many datasets do I have?'"
        ),
        grounded=False,
        tag="operational",
    )


def answer_operational(question: str, store: OperationalStore) -> AnswerBundle:
    """Translate a metadata question into SQL, run it, explain it."""
    text = question.lower()
    object_type = detect_object_type(tokenize(text, drop_stopwords=False))
    wants_unused = bool(_UNUSED_RE.search(text))

    if _REFERENCE_RE.search(text):
        resolved = _find_entity(question, store, object_type)
        if resolved is not None:
            target_type, row = resolved
            edges = store.incoming(target_type, row.id)
            sql = (
                "SELECT from_type, from_id FROM edges "
                f"WHERE to_type = '{target_type}' AND to_id = '{row.id}'"
            )
            explanation = (
                f"Looks up every reference edge pointing at {target_type} row "
                f"'{row.id}' ({row.name}) to show what depends on it."
            )
            if edges:
                listing = ", ".join(f"{e.from_type} {e.from_id}" for e in edges)
                answer = f"{len(edges)} object(s) reference {row.name} ({row.id}): {listing}."
            else:
                answer = f"Nothing references {row.name} ({row.id})."
            return AnswerBundle(
                text=answer, sql_text=sql, sql_explanation=explanation,
                grounded=True, tag="operational",
            )

    if object_type is None:
        return _unsupported(question)

    if _COUNT_RE.search(text):
        if wants_unused:
            unused = store.unused_rows(object_type)
            sql = (
                f"SELECT COUNT(*) FROM {object_type} t WHERE NOT EXISTS "
                f"(SELECT 1 FROM edges e WHERE e.to_type = '{object_type}' AND e.to_id = t.id)"
            )
            explanation = (
                f"Counts rows in the {object_type} table that no reference edge "
                "points at, i.e. objects nothing else uses."
            )
            answer = f"{len(unused)} of your {len(store.rows(object_type))} {object_type} have never been used."
        else:
            count = len(store.rows(object_type))
            sql = f"SELECT COUNT(*) FROM {object_type}"
            explanation = f"Counts every row in the {object_type} table."
            answer = f"You have {count} {object_type}."
        return AnswerBundle(
            text=answer, sql_text=sql, sql_explanation=explanation,
            grounded=True, tag="operational",
        )

    if _LIST_RE.search(text):
        rows = list(store.unused_rows(object_type)) if wants_unused else list(store.rows(object_type))
        shown = rows[:LIST_LIMIT]
        unused_clause = (
            f" t WHERE NOT EXISTS (SELECT 1 FROM edges e WHERE e.to_type = '{object_type}' "
            "AND e.to_id = t.id)"
            if wants_unused
            else ""
        )
        sql = f"SELECT id, name FROM {object_type}{unused_clause} LIMIT {LIST_LIMIT}"
        explanation = (
            f"Lists {'unused ' if wants_unused else ''}rows from the {object_type} "
            f"table, up to {LIST_LIMIT} of them."
        )
        if shown:
            listing = "; ".join(f"{r.name} ({r.id})" for r in shown)
            suffix = f" (showing {len(shown)} of {len(rows)})" if len(rows) > len(shown) else ""
            answer = f"Here are your {'unused ' if wants_unused else ''}{object_type}{suffix}: {listing}."
        else:
            answer = f"You have no {'unused ' if wants_unused else ''}{object_type}."
        return AnswerBundle(
            text=answer, sql_text=sql, sql_explanation=explanation,
            grounded=True, tag="operational",
        )

    return _unsupported(question)
