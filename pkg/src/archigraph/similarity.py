"""Text similarity providers for node matching and visual scoring.

The deterministic fallback needs no network: cosine over lowercase
word-frequency vectors, tokens split on non-alphanumeric characters.  An
optional embedding-endpoint provider posts ``{model, input: [texts]}`` and
computes cosine locally; when it fails the fallback takes over and the
degradation is flagged for the report.
"""

from __future__ import annotations

import math
import re
from collections import Counter

import httpx

__all__ = [
    "SimilarityProvider",
    "TokenCosineProvider",
    "EmbeddingProvider",
    "text_similarity",
    "token_cosine",
]

_TOKEN_RE = re.compile(r"[^0-9a-z]+")


def _tokens(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.split(text.lower()) if t]


def token_cosine(a: str, b: str) -> float:
    """Cosine similarity of term-frequency vectors; 0.0 when either side
    has no tokens."""
    ca, cb = Counter(_tokens(a)), Counter(_tokens(b))
    if not ca or not cb:
        return 0.0
    if ca == cb:
        return 1.0
    dot = sum(ca[t] * cb[t] for t in ca.keys() & cb.keys())
    norm = math.sqrt(sum(v * v for v in ca.values())) * math.sqrt(
        sum(v * v for v in cb.values())
    )
    return dot / norm if norm else 0.0


class SimilarityProvider:
    """Callable contract: (text_a, text_b) -> score in [0, 1], symmetric,
    and 1.0 for identical non-empty text."""

    identifier = "abstract"
    degraded = False

    def __call__(self, a: str, b: str) -> float:  # pragma: no cover - contract
        raise NotImplementedError


class TokenCosineProvider(SimilarityProvider):
    """Deterministic offline fallback; bag-of-words, order-insensitive."""

    identifier = "token-cosine"

    def __call__(self, a: str, b: str) -> float:
        return min(1.0, max(0.0, token_cosine(a, b)))


class EmbeddingProvider(SimilarityProvider):
    """Embedding-endpoint provider with silent fallback to token cosine.

    POSTs {model, input: [a, b]} to ``endpoint`` and computes the cosine of
    the two returned vectors.  Transport or shape errors mark the provider
    degraded and route the call to the fallback.
    """

    def __init__(self, endpoint: str, model: str, timeout: float = 30.0, headers=None):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.headers = dict(headers or {})
        self.identifier = f"embedding:{model}"
        self.degraded = False
        self._fallback = TokenCosineProvider()
        self._cache: dict[tuple[str, str], float] = {}

    def __call__(self, a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        if key in self._cache:
            return self._cache[key]
        try:
            score = self._embed_cosine(key[0], key[1])
        except Exception:
            self.degraded = True
            score = self._fallback(a, b)
        self._cache[key] = score
        return score

    def _embed_cosine(self, a: str, b: str) -> float:
        resp = httpx.post(
            self.endpoint,
            json={"model": self.model, "input": [a, b]},
            timeout=self.timeout,
            headers=self.headers,
        )
        resp.raise_for_status()
        payload = resp.json()
        vectors = [item["embedding"] for item in payload["data"]]
        va, vb = vectors[0], vectors[1]
        dot = sum(x * y for x, y in zip(va, vb))
        norm = math.sqrt(sum(x * x for x in va)) * math.sqrt(sum(y * y for y in vb))
        if norm == 0:
            return 0.0
        return min(1.0, max(0.0, dot / norm))


def text_similarity(a: str, b: str, provider: SimilarityProvider) -> float:
    """Provider score clamped to [0, 1]."""
    return min(1.0, max(0.0, provider(a, b)))
