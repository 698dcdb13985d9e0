"""Clustering quality via pairwise decisions against a gold standard, and
corpus-level statistics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations


class EvaluationError(Exception):
    pass


MentionKey = tuple[str, str]  # (language, exact text)


@dataclass
class GoldClustering:
    person: str
    clusters: list  # list of frozensets of MentionKey

    def __post_init__(self):
        seen: set = set()
        for cluster in self.clusters:
            for key in cluster:
                if key in seen:
                    raise EvaluationError(
                        f"{self.person}: mention key {key!r} appears in two clusters"
                    )
                seen.add(key)

    @property
    def keys(self) -> set:
        return {key for cluster in self.clusters for key in cluster}


@dataclass(frozen=True)
class PairCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("pair counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "PairCounts") -> "PairCounts":
        return PairCounts(
            self.tp + other.tp,
            self.tn + other.tn,
            self.fp + other.fp,
            self.fn + other.fn,
        )


def _assignment(clusters, what: str) -> dict:
    out: dict = {}
    for idx, cluster in enumerate(clusters):
        for key in cluster:
            key = tuple(key)
            if key in out:
                raise EvaluationError(f"{what}: mention key {key!r} appears in two clusters")
            out[key] = idx
    return out


def pairwise_counts(predicted, gold: GoldClustering) -> PairCounts:
    """Score every unordered mention pair as a together/apart decision.

    predicted: iterable of clusters (iterables of (language, text) keys)
    covering exactly the gold keys.
    """
    gold_of = _assignment(gold.clusters, f"gold[{gold.person}]")
    pred_of = _assignment(predicted, f"predicted[{gold.person}]")
    missing = sorted(set(gold_of) - set(pred_of))
    extra = sorted(set(pred_of) - set(gold_of))
    if missing or extra:
        raise EvaluationError(
            f"{gold.person}: predicted clustering covers different mentions; "
            f"missing={missing[:5]} extra={extra[:5]}"
        )
    tp = tn = fp = fn = 0
    keys = sorted(gold_of)
    for a, b in combinations(keys, 2):
        same_gold = gold_of[a] == gold_of[b]
        same_pred = pred_of[a] == pred_of[b]
        if same_gold and same_pred:
            tp += 1
        elif not same_gold and not same_pred:
            tn += 1
        elif not same_gold and same_pred:
            fp += 1
        else:
            fn += 1
    return PairCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def prf(counts: PairCounts) -> tuple[float, float, float]:
    """Precision, recall, F1 over pair decisions. Empty denominators count
    as perfect (no chance to err)."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 1.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def macro_average(per_person) -> tuple[float, float, float]:
    rows = list(per_person)
    if not rows:
        raise ValueError("macro average over an empty list")
    n = len(rows)
    return (
        sum(r[0] for r in rows) / n,
        sum(r[1] for r in rows) / n,
        sum(r[2] for r in rows) / n,
    )


# ---------------------------------------------------------------------------
# Gold and predicted files
# ---------------------------------------------------------------------------

def load_gold(path) -> dict[str, GoldClustering]:
    """One person per line: {"person": ..., "clusters": [[{"language","text"}...]...]}."""
    out: dict[str, GoldClustering] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            doc = json.loads(line)
            if "person" not in doc or "clusters" not in doc:
                raise EvaluationError(f"{path}:{line_no}: need person and clusters fields")
            person = doc["person"]
            clusters = [
                frozenset((m["language"], m["text"]) for m in cluster)
                for cluster in doc["clusters"]
            ]
            if person in out:
                raise EvaluationError(f"{path}:{line_no}: duplicate person {person!r}")
            out[person] = GoldClustering(person=person, clusters=clusters)
    return out


def predicted_from_cluster_dump(path) -> dict[str, list]:
    """Predicted clusterings per person from a cluster-dump ndjson file.
    Mentions sharing one (language, text) key must share a cluster."""
    per_person: dict[str, list] = {}
    key_home: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            if "format" in doc:
                continue  # header record
            person = doc["person"]["canonical_label"]
            keys = []
            for member in doc["members"]:
                key = (member["language"], member["text"])
                prior = key_home.get((person, key))
                if prior is not None and prior != doc["quote_id"]:
                    raise EvaluationError(
                        f"{person}: key {key!r} split across clusters "
                        f"{prior} and {doc['quote_id']}"
                    )
                key_home[(person, key)] = doc["quote_id"]
                keys.append(key)
            per_person.setdefault(person, []).append(frozenset(keys))
    return per_person


@dataclass
class EvaluationReport:
    rows: list = field(default_factory=list)  # (person, PairCounts, p, r, f1)

    @property
    def micro(self):
        total = PairCounts()
        for _, counts, *_ in self.rows:
            total = total + counts
        return total, prf(total)

    @property
    def macro(self):
        return macro_average([(p, r, f) for _, _, p, r, f in self.rows])


def evaluate(predicted_by_person, gold_by_person) -> EvaluationReport:
    report = EvaluationReport()
    for person in sorted(gold_by_person):
        gold = gold_by_person[person]
        predicted = predicted_by_person.get(person)
        if predicted is None:
            raise EvaluationError(f"no predicted clustering for {person!r}")
        counts = pairwise_counts(predicted, gold)
        p, r, f1 = prf(counts)
        report.rows.append((person, counts, p, r, f1))
    return report


def format_report(report: EvaluationReport) -> str:
    lines = []
    header = f"{'Person':<24} {'TP':>6} {'TN':>8} {'FP':>6} {'FN':>6} {'P':>7} {'R':>7} {'F1':>7}"
    lines.append(header)
    lines.append("-" * len(header))
    for person, c, p, r, f1 in report.rows:
        lines.append(
            f"{person:<24} {c.tp:>6} {c.tn:>8} {c.fp:>6} {c.fn:>6} {p:>7.2f} {r:>7.2f} {f1:>7.2f}"
        )
    lines.append("-" * len(header))
    total, (mp, mr, mf) = report.micro
    lines.append(
        f"{'Total (micro)':<24} {total.tp:>6} {total.tn:>8} {total.fp:>6} {total.fn:>6} "
        f"{mp:>7.2f} {mr:>7.2f} {mf:>7.2f}"
    )
    ap, ar, af = report.macro
    lines.append(f"{'Total (macro)':<24} {'':>6} {'':>8} {'':>6} {'':>6} {ap:>7.2f} {ar:>7.2f} {af:>7.2f}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Corpus statistics
# ---------------------------------------------------------------------------

@dataclass
class CorpusStats:
    per_language: dict = field(default_factory=dict)
    total_persons: int = 0
    total_quotes: int = 0
    total_mentions: int = 0
    total_mentions_with_context: int = 0
    total_triples: int | None = None

    def language_row(self, language: str) -> dict:
        return self.per_language.setdefault(
            language,
            {"persons": set(), "quotes": set(), "mentions": 0, "mentions_with_context": 0},
        )


def stats_from_clusters(clusters) -> CorpusStats:
    """Per-language corpus counts: a quote counts for every language it has a
    mention in, so per-language quote counts sum to at least the total."""
    stats = CorpusStats()
    persons = set()
    quotes = set()
    for cluster in clusters:
        person_key = cluster.person.identity_key()
        persons.add(person_key)
        quotes.add(cluster.quote_id)
        for m in cluster.member_mentions:
            row = stats.language_row(m.language)
            row["persons"].add(person_key)
            row["quotes"].add(cluster.quote_id)
            row["mentions"] += 1
            stats.total_mentions += 1
            if m.contexts:
                row["mentions_with_context"] += 1
                stats.total_mentions_with_context += 1
    stats.total_persons = len(persons)
    stats.total_quotes = len(quotes)
    return stats


def format_stats(stats: CorpusStats) -> str:
    lines = [
        "# Quote counts are per-language participation: a quote with mentions in",
        "# several languages counts once per such language, so the per-language",
        "# quote column sums to at least the total.",
        f"{'Language':<12} {'Persons':>9} {'Quotes':>9} {'Mentions':>9} {'With context':>13}",
    ]
    for language in sorted(stats.per_language):
        row = stats.per_language[language]
        lines.append(
            f"{language:<12} {len(row['persons']):>9} {len(row['quotes']):>9} "
            f"{row['mentions']:>9} {row['mentions_with_context']:>13}"
        )
    lines.append(
        f"{'All':<12} {stats.total_persons:>9} {stats.total_quotes:>9} "
        f"{stats.total_mentions:>9} {stats.total_mentions_with_context:>13}"
    )
    if stats.total_triples is not None:
        lines.append(f"Triples: {stats.total_triples}")
    return "\n".join(lines)


def stats_to_dict(stats: CorpusStats) -> dict:
    return {
        "per_language": {
            lang: {
                "persons": len(row["persons"]),
                "quotes": len(row["quotes"]),
                "mentions": row["mentions"],
                "mentions_with_context": row["mentions_with_context"],
            }
            for lang, row in sorted(stats.per_language.items())
        },
        "total": {
            "persons": stats.total_persons,
            "quotes": stats.total_quotes,
            "mentions": stats.total_mentions,
            "mentions_with_context": stats.total_mentions_with_context,
            "triples": stats.total_triples,
        },
    }
