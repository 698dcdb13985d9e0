"""Text-analysis backend contract: embeddings, sentiment, language detection.

The pipeline runs against an HTTP service when one is configured and reachable;
otherwise it degrades to the built-in deterministic embedder, edition-code
language fallback, and no sentiment.
"""

from __future__ import annotations

import hashlib
import math
import os
import unicodedata
from dataclasses import dataclass

import requests

FALLBACK_DIM = 512
FALLBACK_TAG = "fallback-char-trigram-512"
ENDPOINT_ENV = "QUOTEKG_NLP_ENDPOINT"

_PAD_START = "\x02"
_PAD_END = "\x03"


class BackendUnavailable(Exception):
    pass


@dataclass(frozen=True)
class Sentiment:
    category: str  # positive | negative | neutral
    score: float

    def __post_init__(self):
        if self.category not in ("positive", "negative", "neutral"):
            raise ValueError(f"bad sentiment category {self.category!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"sentiment score out of range: {self.score}")


def _trigram_buckets(text: str) -> dict[int, int]:
    cleaned = []
    for ch in text.lower():
        if unicodedata.category(ch).startswith("P"):
            continue
        cleaned.append(ch)
    collapsed = " ".join("".join(cleaned).split())
    padded = _PAD_START + collapsed + _PAD_END
    grams = (
        [padded[i : i + 3] for i in range(len(padded) - 2)]
        if len(padded) >= 3
        else [padded]
    )
    counts: dict[int, int] = {}
    for gram in grams:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        bucket = int.from_bytes(digest, "big") % FALLBACK_DIM
        counts[bucket] = counts.get(bucket, 0) + 1
    return counts


def fallback_embed(text: str) -> list[float]:
    """Deterministic offline embedding: hashed character trigrams of the
    lowercased, punctuation-stripped, boundary-padded text, L2-normalized."""
    counts = _trigram_buckets(text)
    norm = math.sqrt(sum(c * c for c in counts.values()))
    vector = [0.0] * FALLBACK_DIM
    for bucket, count in counts.items():
        vector[bucket] = count / norm
    return vector


class FallbackBackend:
    """Offline stand-in: trigram embeddings, no sentiment, no detection."""

    model_tag = FALLBACK_TAG
    dim = FALLBACK_DIM
    is_fallback = True

    def embed(self, texts):
        return [fallback_embed(t) for t in texts]

    def sentiment(self, texts):
        return [None for _ in texts]

    def detect_language(self, texts):
        return [None for _ in texts]


class HttpBackend:
    """Client for the NLP sidecar service. Raises BackendUnavailable on any
    transport or contract failure so callers can fall back cleanly."""

    is_fallback = False

    def __init__(self, base_url: str, timeout: float = 30.0, batch_limit: int = 256):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.batch_limit = batch_limit
        self.model_tag = "unknown"
        self.dim = 0
        self._session = requests.Session()

    def check_health(self) -> dict:
        try:
            resp = self._session.get(f"{self.base_url}/health", timeout=self.timeout)
            resp.raise_for_status()
            info = resp.json()
        except Exception as exc:
            raise BackendUnavailable(f"health check failed: {exc}") from exc
        self.model_tag = info.get("model_tag") or "unknown"
        self.dim = int(info.get("dim") or 0)
        return info

    def _post(self, endpoint: str, texts):
        try:
            resp = self._session.post(
                f"{self.base_url}/{endpoint}", json={"texts": list(texts)}, timeout=self.timeout
            )
            resp.raise_for_status()
            return resp.json()
        except Exception as exc:
            raise BackendUnavailable(f"{endpoint} call failed: {exc}") from exc

    def _batched(self, texts, call):
        out = []
        texts = list(texts)
        for start in range(0, len(texts), self.batch_limit):
            out.extend(call(texts[start : start + self.batch_limit]))
        return out

    def embed(self, texts):
        def call(batch):
            payload = self._post("embed", batch)
            vectors = payload.get("vectors")
            if not isinstance(vectors, list) or len(vectors) != len(batch):
                raise BackendUnavailable("embed response does not match request")
            self.model_tag = payload.get("model_tag", self.model_tag)
            self.dim = int(payload.get("dim") or self.dim)
            return vectors

        return self._batched(texts, call)

    def sentiment(self, texts):
        def call(batch):
            payload = self._post("sentiment", batch)
            results = payload.get("results")
            if not isinstance(results, list) or len(results) != len(batch):
                raise BackendUnavailable("sentiment response does not match request")
            out = []
            for item in results:
                score = min(1.0, max(0.0, float(item["score"])))
                out.append(Sentiment(category=item["category"], score=score))
            return out

        return self._batched(texts, call)

    def detect_language(self, texts):
        def call(batch):
            payload = self._post("langdetect", batch)
            results = payload.get("results")
            if not isinstance(results, list) or len(results) != len(batch):
                raise BackendUnavailable("langdetect response does not match request")
            return [item.get("language_code") or None for item in results]

        return self._batched(texts, call)


def make_backend(endpoint: str | None = None):
    """Backend from an explicit endpoint, the environment override, or the
    offline fallback. Returns (backend, degraded_flag)."""
    endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
    if endpoint:
        backend = HttpBackend(endpoint)
        try:
            backend.check_health()
            return backend, False
        except BackendUnavailable:
            return FallbackBackend(), True
    return FallbackBackend(), True
