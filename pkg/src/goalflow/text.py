"""Shared text utilities: tokenization, stopword filtering, slug generation.

The same tokenizer backs the goal retriever's lexical scoring and the
knowledge-base inverted index, so both rank with identical term semantics.
"""

from __future__ import annotations

import re

# Deliberately small: only glue words that carry no signal for matching
# short platform queries against goal/step texts.
STOPWORDS = frozenset(
    {
        "a", "an", "the", "is", "are", "am", "be", "been", "was", "were",
        "to", "of", "in", "on", "at", "for", "and", "or", "it", "its",
        "this", "that", "these", "those", "i", "my", "me", "we", "our",
        "you", "your", "they", "their", "he", "she", "him", "her",
        "do", "does", "did", "can", "could", "should", "would", "will",
        "may", "might", "have", "has", "had", "how", "what", "when",
        "where", "which", "who", "why", "with", "by", "from", "as", "so",
        "please",
    }
)

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)?")
_SLUG_STRIP_RE = re.compile(r"[^a-z0-9]+")


def tokenize(text: str, *, drop_stopwords: bool = True) -> list[str]:
    """Lowercased, punctuation-free tokens in order of appearance."""
    tokens = _TOKEN_RE.findall(text.lower())
    if drop_stopwords:
        tokens = [t for t in tokens if t not in STOPWORDS]
    return tokens


def token_set(text: str) -> frozenset[str]:
    return frozenset(tokenize(text))


def slugify(text: str, max_length: int = 64) -> str:
    """Deterministic id from free text: lowercase, runs of non-alphanumerics
    collapsed to single hyphens, truncated to ``max_length``."""
    slug = _SLUG_STRIP_RE.sub("-", text.lower()).strip("-")
    if len(slug) > max_length:
        slug = slug[:max_length].rstrip("-")
    return slug
