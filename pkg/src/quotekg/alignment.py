"""Cross-lingual alignment: cluster one person's mentions into quotes by
cosine similarity of their text embeddings."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .enrichment import (
    PartialDate,
    QuoteMention,
    date_from_dict,
    date_to_dict,
    mention_from_dict,
    mention_to_dict,
    person_from_dict,
    person_to_dict,
    resolve_date_candidates,
)
from .nlp import BackendUnavailable, FALLBACK_TAG, FallbackBackend, Sentiment

DEFAULT_THRESHOLD = 0.8
# Tolerance so that a threshold of exactly 1.0 still groups bitwise-identical
# vectors whose float dot product rounds a hair below 1.
COSINE_EPS = 1e-9

NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple
    model_tag: str

    def __post_init__(self):
        norm = float(np.linalg.norm(np.asarray(self.values, dtype=float)))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"embedding norm {norm} not within {NORM_TOLERANCE} of 1")


@dataclass(frozen=True)
class QuoteCluster:
    quote_id: str
    person: object
    member_mentions: tuple
    aggregated_sentiment: Sentiment | None = None
    aggregated_date: PartialDate | None = None

    def __post_init__(self):
        if not self.member_mentions:
            raise ValueError("cluster must have at least one member")

    @property
    def misattributed(self) -> bool:
        return any(m.misattributed for m in self.member_mentions)


def _as_unit(vec) -> tuple:
    arr = np.asarray(vec, dtype=float)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ValueError("zero vector cannot be normalized")
    return tuple(arr / norm)


def embed_batch(texts, backend) -> list[EmbeddingVector]:
    """One unit-norm vector per text. A backend failure re-embeds the whole
    batch with the offline fallback so a clustering run never mixes models."""
    texts = list(texts)
    if not texts:
        return []
    try:
        raw = backend.embed(texts)
        tag = backend.model_tag
        if len(raw) != len(texts):
            raise BackendUnavailable("embedding count does not match text count")
    except BackendUnavailable:
        fallback = FallbackBackend()
        raw = fallback.embed(texts)
        tag = FALLBACK_TAG
    return [EmbeddingVector(values=_as_unit(v), model_tag=tag) for v in raw]


def mention_sort_key(mention: QuoteMention):
    return (mention.language, mention.text, mention.mention_id)


def _quote_id(person, members) -> str:
    digest = hashlib.blake2b(digest_size=8)
    digest.update(person.identity_key().encode("utf-8"))
    for m in members:
        digest.update(b"\x1f")
        digest.update(m.language.encode("utf-8"))
        digest.update(b"\x1e")
        digest.update(m.text.encode("utf-8"))
        digest.update(b"\x1d")
        digest.update(m.mention_id.encode("utf-8"))
    return digest.hexdigest()


def cluster_mentions(mentions, vectors, threshold: float = DEFAULT_THRESHOLD) -> list[QuoteCluster]:
    """Greedy community detection over one person's mentions.

    Repeatedly pick the unassigned mention with the most unassigned
    neighbours at cosine >= threshold as a community center and absorb those
    neighbours. Ties on the neighbour count go to the earliest mention in
    (language, text) order, which also fixes member and cluster order.
    """
    mentions = list(mentions)
    vectors = list(vectors)
    if len(mentions) != len(vectors):
        raise ValueError("one vector per mention required")
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    if not mentions:
        return []
    persons = {m.person.identity_key() for m in mentions}
    if len(persons) > 1:
        raise ValueError("cluster_mentions works on a single person at a time")
    tags = {v.model_tag for v in vectors}
    if len(tags) > 1:
        raise ValueError(f"mixed embedding models in one clustering run: {sorted(tags)}")

    order = sorted(range(len(mentions)), key=lambda i: mention_sort_key(mentions[i]))
    matrix = np.asarray([vectors[i].values for i in order], dtype=float)
    sims = matrix @ matrix.T
    n = len(order)
    linked = sims >= (threshold - COSINE_EPS)

    assigned = [False] * n
    communities: list[list[int]] = []
    while not all(assigned):
        best_center = -1
        best_count = -1
        for i in range(n):
            if assigned[i]:
                continue
            count = sum(
                1 for j in range(n) if j != i and not assigned[j] and linked[i, j]
            )
            if count > best_count:
                best_center = i
                best_count = count
        members = [best_center] + [
            j
            for j in range(n)
            if j != best_center and not assigned[j] and linked[best_center, j]
        ]
        for j in members:
            assigned[j] = True
        communities.append(sorted(members))

    person = mentions[0].person
    clusters = []
    for members in sorted(communities, key=lambda ms: ms[0]):
        member_mentions = tuple(mentions[order[j]] for j in members)
        cluster = QuoteCluster(
            quote_id=_quote_id(person, member_mentions),
            person=person,
            member_mentions=member_mentions,
            aggregated_sentiment=None,
            aggregated_date=None,
        )
        clusters.append(
            QuoteCluster(
                quote_id=cluster.quote_id,
                person=person,
                member_mentions=member_mentions,
                aggregated_sentiment=aggregate_sentiment(cluster),
                aggregated_date=aggregate_date(cluster),
            )
        )
    return clusters


_TIE_ORDER = {"neutral": 0, "positive": 1, "negative": 2}


def aggregate_sentiment(cluster: QuoteCluster) -> Sentiment | None:
    """Most frequent sentiment category across members, scored by the mean of
    that category's scores. Frequency ties prefer neutral, then positive."""
    with_sentiment = [m.sentiment for m in cluster.member_mentions if m.sentiment]
    if not with_sentiment:
        return None
    counts: dict[str, list[float]] = {}
    for s in with_sentiment:
        counts.setdefault(s.category, []).append(s.score)
    winner = max(counts, key=lambda c: (len(counts[c]), -_TIE_ORDER[c]))
    scores = counts[winner]
    return Sentiment(category=winner, score=sum(scores) / len(scores))


def aggregate_date(cluster: QuoteCluster) -> PartialDate | None:
    """Single quote-level date: the most precise of the members' mutually
    compatible dates, or none when any two conflict."""
    return resolve_date_candidates(
        m.date for m in cluster.member_mentions if m.date is not None
    )


# ---------------------------------------------------------------------------
# Per-person driver and ndjson round-trip
# ---------------------------------------------------------------------------

def align_person(mentions, backend, threshold: float = DEFAULT_THRESHOLD):
    """Embed and cluster one person's mentions. Returns (clusters, model_tag)."""
    mentions = sorted(mentions, key=mention_sort_key)
    vectors = embed_batch([m.text for m in mentions], backend)
    tag = vectors[0].model_tag if vectors else backend.model_tag
    return cluster_mentions(mentions, vectors, threshold), tag


def cluster_to_dict(cluster: QuoteCluster) -> dict:
    return {
        "quote_id": cluster.quote_id,
        "person": person_to_dict(cluster.person),
        "members": [mention_to_dict(m) for m in cluster.member_mentions],
        "aggregated_sentiment": (
            {
                "category": cluster.aggregated_sentiment.category,
                "score": cluster.aggregated_sentiment.score,
            }
            if cluster.aggregated_sentiment
            else None
        ),
        "aggregated_date": date_to_dict(cluster.aggregated_date),
        "misattributed": cluster.misattributed,
    }


def cluster_from_dict(data: dict) -> QuoteCluster:
    return QuoteCluster(
        quote_id=data["quote_id"],
        person=person_from_dict(data["person"]),
        member_mentions=tuple(mention_from_dict(m) for m in data["members"]),
        aggregated_sentiment=(
            Sentiment(
                data["aggregated_sentiment"]["category"],
                data["aggregated_sentiment"]["score"],
            )
            if data.get("aggregated_sentiment")
            else None
        ),
        aggregated_date=date_from_dict(data.get("aggregated_date")),
    )
