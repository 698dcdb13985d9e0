"""Embedding and sentiment backends.

`real` backends load the pinned multilingual models (needs downloaded or
cached weights). `hash` and `lexicon` are deterministic offline stand-ins
for integration testing; their tags make the substitution visible to
clients."""

from __future__ import annotations

import hashlib
import math
import re
import unicodedata

HASH_DIM = 512
HASH_TAG = "hash-char-trigram-512"
LEXICON_TAG = "lexicon-sentiment-v1"


class ModelNotReady(Exception):
    pass


class HashEmbedding:
    """Hashed character trigrams over lowercased, punctuation-free text."""

    kind = "hash"

    def __init__(self):
        self.model_tag = HASH_TAG
        self.dim = HASH_DIM

    def encode(self, texts) -> list[list[float]]:
        return [self._one(t) for t in texts]

    def _one(self, text: str) -> list[float]:
        cleaned = "".join(
            ch for ch in text.lower() if not unicodedata.category(ch).startswith("P")
        )
        collapsed = " ".join(cleaned.split())
        padded = "\x02" + collapsed + "\x03"
        grams = (
            [padded[i : i + 3] for i in range(len(padded) - 2)]
            if len(padded) >= 3
            else [padded]
        )
        counts: dict[int, int] = {}
        for gram in grams:
            digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
            bucket = int.from_bytes(digest, "big") % HASH_DIM
            counts[bucket] = counts.get(bucket, 0) + 1
        norm = math.sqrt(sum(c * c for c in counts.values()))
        vector = [0.0] * HASH_DIM
        for bucket, count in counts.items():
            vector[bucket] = count / norm
        return vector


class RealEmbedding:
    kind = "real"

    def __init__(self, model_name: str):
        from sentence_transformers import SentenceTransformer

        self._model = SentenceTransformer(model_name)
        self.model_tag = model_name
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts) -> list[list[float]]:
        vectors = self._model.encode(
            list(texts), normalize_embeddings=True, show_progress_bar=False
        )
        return [list(map(float, v)) for v in vectors]


_POSITIVE = {
    "love", "loves", "loved", "good", "great", "best", "happy", "wonderful",
    "beautiful", "hope", "freedom", "peace", "win", "succeed", "strong",
    "liebe", "gut", "schön", "stark", "frieden", "hoffnung",
    "amour", "bon", "bonne", "beau", "belle", "espoir", "paix",
    "amore", "buono", "bene", "bella", "pace", "speranza",
    "ljubav", "dobro", "mir",
}
_NEGATIVE = {
    "hate", "hates", "hated", "bad", "worst", "terrible", "awful", "war",
    "fear", "stupid", "fail", "failure", "wrong", "death", "insanity",
    "hass", "schlecht", "krieg", "angst", "falsch", "tod",
    "haine", "mauvais", "guerre", "peur", "stupide", "mort",
    "odio", "cattivo", "guerra", "paura", "stupido", "morte",
    "mržnja", "zlo", "rat", "strah", "smrt",
}
_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)


class LexiconSentiment:
    """Deterministic keyword sentiment; a stand-in, tagged as such."""

    kind = "lexicon"

    def __init__(self):
        self.model_tag = LEXICON_TAG

    def classify(self, texts) -> list[dict]:
        return [self._one(t) for t in texts]

    def _one(self, text: str) -> dict:
        tokens = [t.lower() for t in _WORD_RE.findall(text)]
        positive = sum(1 for t in tokens if t in _POSITIVE)
        negative = sum(1 for t in tokens if t in _NEGATIVE)
        if positive > negative:
            category, margin = "positive", positive - negative
        elif negative > positive:
            category, margin = "negative", negative - positive
        else:
            category, margin = "neutral", 0
        score = min(1.0, 0.5 + 0.1 * margin)
        return {"category": category, "score": score}


class RealSentiment:
    kind = "real"

    _LABELS = {
        "positive": "positive",
        "negative": "negative",
        "neutral": "neutral",
        "label_0": "negative",
        "label_1": "neutral",
        "label_2": "positive",
    }

    def __init__(self, model_name: str):
        from transformers import pipeline

        self._pipe = pipeline("sentiment-analysis", model=model_name, truncation=True)
        self.model_tag = model_name

    def classify(self, texts) -> list[dict]:
        out = []
        for result in self._pipe(list(texts)):
            category = self._LABELS.get(result["label"].lower(), "neutral")
            score = min(1.0, max(0.0, float(result["score"])))
            out.append({"category": category, "score": score})
        return out


def build_backends(settings):
    """(embedding, sentiment) per settings.backend; `auto` tries the real
    models and degrades to the offline stand-ins."""
    if settings.backend == "hash":
        return HashEmbedding(), LexiconSentiment()
    if settings.backend == "real":
        return RealEmbedding(settings.embedding_model), RealSentiment(settings.sentiment_model)
    try:
        embedding = RealEmbedding(settings.embedding_model)
    except Exception:
        embedding = HashEmbedding()
    try:
        sentiment = RealSentiment(settings.sentiment_model)
    except Exception:
        sentiment = LexiconSentiment()
    return embedding, sentiment
