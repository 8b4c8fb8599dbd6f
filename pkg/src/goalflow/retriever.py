"""Composite goal retrieval.

Matches a user query against every goal description and every step of
every guidance workflow, blending a lexical overlap score with a semantic
cosine score. The best target decides whether the query triggers a
high-level goal, lands on a specific sub-goal (step), or matches nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .embeddings import EmbeddingProvider, HashedTrigramEmbedder
from .goals import Repository
from .text import token_set


class MatchKind(str, Enum):
    HIGH_LEVEL = "high_level"
    SUB_GOAL = "sub_goal"
    NO_MATCH = "no_match"


@dataclass(frozen=True)
class RetrieverConfig:
    alpha: float = 0.5  # weight of the lexical score in the blend
    tau: float = 0.45  # trigger threshold on the combined score
    embedding_dim: int = 256


@dataclass(frozen=True)
class MatchTarget:
    """One indexed text: a goal description (step_index None) or a step."""

    goal_id: str
    step_index: int | None
    text: str


@dataclass(frozen=True)
class Candidate:
    target: MatchTarget
    lexical: float
    semantic: float
    combined: float


@dataclass(frozen=True)
class MatchResult:
    kind: MatchKind
    goal_id: str | None
    step_index: int | None
    lexical_score: float
    semantic_score: float
    combined_score: float
    candidates: tuple[Candidate, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class GoalIndex:
    """Immutable retrieval index; rebuilt wholesale when the repo changes."""

    targets: tuple[MatchTarget, ...]
    token_sets: tuple[frozenset[str], ...]
    vectors: np.ndarray
    embedder: EmbeddingProvider
    config: RetrieverConfig

    def __len__(self) -> int:
        return len(self.targets)


def build_index(
    repo: Repository,
    embedder: EmbeddingProvider | None = None,
    config: RetrieverConfig | None = None,
) -> GoalIndex:
    """Index one target per goal description plus one per guidance step."""
    config = config or RetrieverConfig()
    embedder = embedder or HashedTrigramEmbedder(config.embedding_dim)

    targets: list[MatchTarget] = []
    for workflow in repo:
        targets.append(MatchTarget(goal_id=workflow.id, step_index=None, text=workflow.goal))
        for step in workflow.steps:
            targets.append(
                MatchTarget(
                    goal_id=workflow.id,
                    step_index=step.index,
                    text=f"{step.name} {step.description}",
                )
            )

    token_sets = tuple(token_set(t.text) for t in targets)
    if targets:
        vectors = np.stack([embedder.embed(t.text) for t in targets])
    else:
        vectors = np.zeros((0, embedder.dim), dtype=np.float64)
    return GoalIndex(
        targets=tuple(targets),
        token_sets=token_sets,
        vectors=vectors,
        embedder=embedder,
        config=config,
    )


def _lexical_score(query_tokens: frozenset[str], target_tokens: frozenset[str]) -> float:
    if not query_tokens:
        return 0.0
    return len(query_tokens & target_tokens) / len(query_tokens)


def match(index: GoalIndex, query: str) -> MatchResult:
    """Score every target and pick the best; below-threshold means no match."""
    if not query or not query.strip():
        raise ValueError("query must be non-empty")
    config = index.config

    if not index.targets:
        return MatchResult(MatchKind.NO_MATCH, None, None, 0.0, 0.0, 0.0, ())

    query_tokens = token_set(query)
    query_vec = index.embedder.embed(query)
    sims = index.vectors @ query_vec  # rows are L2-normalized already
    query_norm = float(np.linalg.norm(query_vec))

    scored: list[tuple[float, bool, int, Candidate]] = []
    for position, target in enumerate(index.targets):
        lexical = _lexical_score(query_tokens, index.token_sets[position])
        row_norm = float(np.linalg.norm(index.vectors[position]))
        cos = float(sims[position]) if query_norm > 0 and row_norm > 0 else 0.0
        semantic = (cos + 1.0) / 2.0
        combined = config.alpha * lexical + (1.0 - config.alpha) * semantic
        candidate = Candidate(target, lexical, semantic, combined)
        scored.append((-combined, target.step_index is not None, position, candidate))

    scored.sort(key=lambda item: item[:3])
    ranked = tuple(item[3] for item in scored)
    best = ranked[0]

    if best.combined < config.tau:
        return MatchResult(
            MatchKind.NO_MATCH, None, None, best.lexical, best.semantic, best.combined, ranked
        )
    kind = MatchKind.HIGH_LEVEL if best.target.step_index is None else MatchKind.SUB_GOAL
    return MatchResult(
        kind,
        best.target.goal_id,
        best.target.step_index,
        best.lexical,
        best.semantic,
        best.combined,
        ranked,
    )
