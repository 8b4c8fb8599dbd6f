"""Text embedding providers for semantic matching.

The default embedder hashes character trigrams into a fixed-size frequency
vector. It needs no model weights and no network, and it is fully
deterministic, which keeps retrieval tests reproducible. A remote HTTP
embedder can be swapped in where real semantic vectors are wanted; both
satisfy the same one-method contract.
"""

from __future__ import annotations

import re
import zlib
from typing import Protocol

import numpy as np
import requests


class EmbeddingError(Exception):
    pass


class EmbeddingProvider(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


_WS_RE = re.compile(r"\s+")


def _trigrams(text: str) -> list[str]:
    t = _WS_RE.sub(" ", text.lower().strip())
    if not t:
        return []
    if len(t) < 3:
        return [t]
    return [t[i : i + 3] for i in range(len(t) - 2)]


class HashedTrigramEmbedder:
    """Character-trigram counts hashed into `dim` buckets, L2-normalized."""

    def __init__(self, dim: int = 256):
        if dim < 1:
            raise EmbeddingError("embedding dimension must be positive")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for gram in _trigrams(text):
            vec[zlib.crc32(gram.encode("utf-8")) % self.dim] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm > 0:
            vec /= norm
        return vec


class HTTPEmbedder:
    """Remote embedding endpoint: POST {model, input:[text]} -> data[0].embedding."""

    def __init__(self, base_url: str, model: str = "", dim: int = 0, timeout: float = 30.0):
        if not base_url:
            raise EmbeddingError("http embedder requires base_url")
        self.base_url = base_url
        self.model = model
        self.dim = dim
        self.timeout = timeout

    def embed(self, text: str) -> np.ndarray:
        try:
            resp = requests.post(
                self.base_url,
                json={"model": self.model, "input": [text]},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise EmbeddingError(f"embedding endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise EmbeddingError(f"embedding endpoint returned HTTP {resp.status_code}")
        try:
            vec = np.asarray(resp.json()["data"][0]["embedding"], dtype=np.float64)
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise EmbeddingError(f"malformed embedding response: {exc}") from exc
        if self.dim and vec.shape[0] != self.dim:
            raise EmbeddingError(f"expected dimension {self.dim}, got {vec.shape[0]}")
        norm = float(np.linalg.norm(vec))
        if norm > 0:
            vec = vec / norm
        return vec


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector is all zeros."""
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))
