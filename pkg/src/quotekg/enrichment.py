"""Turn raw extracted quotes into mention records enriched with dates,
sources, entity links, identity links, detected language and sentiment."""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass
from urllib.parse import quote as urlquote
from urllib.parse import urlsplit

from .nlp import BackendUnavailable, FallbackBackend, Sentiment
from .wikitext import ExternalLink, InternalLink, iter_nodes, strip_markup


class Precision(enum.IntEnum):
    YEAR = 1
    MONTH = 2
    DAY = 3


@dataclass(frozen=True)
class PartialDate:
    year: int
    month: int | None = None
    day: int | None = None

    def __post_init__(self):
        if self.day is not None and self.month is None:
            raise ValueError("day requires month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")
        if self.day is not None and not 1 <= self.day <= 31:
            raise ValueError(f"day out of range: {self.day}")

    @property
    def precision(self) -> Precision:
        if self.day is not None:
            return Precision.DAY
        if self.month is not None:
            return Precision.MONTH
        return Precision.YEAR

    def compatible(self, other: "PartialDate") -> bool:
        """True when the two agree on every field both populate."""
        if self.year != other.year:
            return False
        if self.month is not None and other.month is not None and self.month != other.month:
            return False
        if self.day is not None and other.day is not None and self.day != other.day:
            return False
        return True

    def isoformat(self) -> str:
        if self.day is not None:
            return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"
        if self.month is not None:
            return f"{self.year:04d}-{self.month:02d}"
        return f"{self.year:04d}"


def resolve_date_candidates(candidates) -> PartialDate | None:
    """Most precise of mutually compatible candidates; None on any conflict."""
    unique = list(dict.fromkeys(candidates))
    if not unique:
        return None
    for i, a in enumerate(unique):
        for b in unique[i + 1 :]:
            if not a.compatible(b):
                return None
    return max(unique, key=lambda d: d.precision)


# ---------------------------------------------------------------------------
# Date grammar
# ---------------------------------------------------------------------------

_YEAR = r"(?:1[0-9]{3}|2[0-9]{3})"
_DATE_PATTERN_CACHE: dict = {}


def _date_patterns(rules):
    key = (rules.language_code, tuple(sorted(rules.month_names.items())))
    cached = _DATE_PATTERN_CACHE.get(key)
    if cached is not None:
        return cached
    months = sorted(rules.month_names, key=len, reverse=True)
    alt = "|".join(re.escape(m) for m in months) or r"(?!x)x"
    patterns = [
        # ISO day
        (re.compile(rf"\b({_YEAR})-(0[1-9]|1[0-2])-(0[1-9]|[12][0-9]|3[01])\b"),
         lambda m, t: PartialDate(int(m[1]), int(m[2]), int(m[3]))),
        # "2015, Aug 31"
        (re.compile(rf"\b({_YEAR}),\s+({alt})\s+([0-3]?[0-9])\b", re.IGNORECASE),
         lambda m, t: PartialDate(int(m[1]), t[m[2].lower()], int(m[3]))),
        # "Aug 31, 2015"
        (re.compile(rf"\b({alt})\s+([0-3]?[0-9]),?\s+({_YEAR})\b", re.IGNORECASE),
         lambda m, t: PartialDate(int(m[3]), t[m[1].lower()], int(m[2]))),
        # "31. August 2015" / "31 août 2015"
        (re.compile(rf"\b([0-3]?[0-9])\.?\s+({alt})\s+({_YEAR})\b", re.IGNORECASE),
         lambda m, t: PartialDate(int(m[3]), t[m[2].lower()], int(m[1]))),
        # "May 2020"
        (re.compile(rf"\b({alt})\s+({_YEAR})\b", re.IGNORECASE),
         lambda m, t: PartialDate(int(m[2]), t[m[1].lower()])),
        # bare year
        (re.compile(rf"\b({_YEAR})\b"),
         lambda m, t: PartialDate(int(m[1]))),
    ]
    _DATE_PATTERN_CACHE[key] = patterns
    return patterns


def find_dates(text: str, rules) -> list[PartialDate]:
    """All date expressions in the text, most specific reading first: spans
    already consumed by a more specific pattern are not re-read as years."""
    found: list[tuple[int, PartialDate]] = []
    consumed: list[tuple[int, int]] = []
    for pattern, build in _date_patterns(rules):
        for m in pattern.finditer(text):
            span = m.span()
            if any(span[0] < e and s < span[1] for s, e in consumed):
                continue
            try:
                date = build(m, rules.month_names)
            except ValueError:
                continue
            consumed.append(span)
            found.append((span[0], date))
    return [d for _, d in sorted(found, key=lambda p: p[0])]


def extract_date(template_params, section_path, context_texts, rules) -> PartialDate | None:
    """Date for one quote. Template date keys take priority; section titles
    and context lines are consulted only when the template yields nothing.
    Among compatible candidates the most precise wins; conflicts yield None."""
    candidates: list[PartialDate] = []
    params = dict(_stripped_params(template_params))
    for key in rules.date_template_keys:
        value = params.get(key)
        if value:
            candidates.extend(find_dates(value, rules))
    if not candidates:
        for title in section_path:
            candidates.extend(find_dates(title, rules))
        for text in context_texts:
            candidates.extend(find_dates(text or "", rules))
    return resolve_date_candidates(candidates)


def _stripped_params(template_params):
    for key, value in template_params or []:
        if isinstance(value, str):
            yield key, value
        else:
            yield key, strip_markup(value)


# ---------------------------------------------------------------------------
# Contexts, sources, entity links
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContextRecord:
    context_text: str | None = None
    source_urls: tuple = ()
    origin_label: str | None = None

    def __post_init__(self):
        if not self.context_text and not self.source_urls and not self.origin_label:
            raise ValueError("context record must populate at least one field")


def _is_absolute_url(url: str) -> bool:
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return parts.scheme in ("http", "https", "ftp") and bool(parts.netloc)


def _urls_in_inline(tokens):
    for tok in tokens:
        if isinstance(tok, ExternalLink) and _is_absolute_url(tok.url):
            yield tok.url


def extract_sources(context_nodes, template_params, rules, stats=None) -> list[str]:
    """Deduplicated absolute source URLs, document order: context markup links
    first, then the template's source keys. Invalid URLs are skipped."""
    urls: list[str] = []
    for node in iter_nodes(list(context_nodes or [])):
        if hasattr(node, "inline"):
            urls.extend(_urls_in_inline(node.inline))
    params = dict(_stripped_params(template_params))
    for key in rules.source_template_keys:
        value = params.get(key)
        if not value:
            continue
        if _is_absolute_url(value):
            urls.append(value)
        elif stats is not None:
            stats.invalid_urls += 1
    return list(dict.fromkeys(urls))


def context_record_from_item(item) -> ContextRecord | None:
    text = strip_markup(item.inline)
    urls = tuple(dict.fromkeys(_urls_in_inline(item.inline)))
    label = strip_markup(
        [t for t in item.inline if not isinstance(t, ExternalLink)]
    )
    try:
        return ContextRecord(
            context_text=text or None,
            source_urls=urls,
            origin_label=label or None,
        )
    except ValueError:
        return None


def build_contexts(raw, rules, stats=None) -> list[ContextRecord]:
    contexts = []
    for node in iter_nodes(list(raw.context_nodes or [])):
        if hasattr(node, "inline") and hasattr(node, "depth"):
            record = context_record_from_item(node)
            if record is not None:
                contexts.append(record)
    template_urls = []
    params = dict(_stripped_params(raw.template_params))
    for key in rules.source_template_keys:
        value = params.get(key)
        if value and _is_absolute_url(value):
            template_urls.append(value)
        elif value and stats is not None:
            stats.invalid_urls += 1
    if template_urls:
        contexts.append(ContextRecord(source_urls=tuple(dict.fromkeys(template_urls))))
    return contexts


@dataclass(frozen=True)
class EntityLink:
    surface: str
    target_title: str
    resolved_iri: str | None = None

    def __post_init__(self):
        if not self.surface:
            raise ValueError("entity link surface must be nonempty")


def collect_entity_links(raw, sitelinks) -> list[EntityLink]:
    """Internal links found in the quote markup, its contexts and template
    values; namespace-prefixed targets (File:, Category:, ...) are ignored."""
    links: list[InternalLink] = []

    def take(tokens):
        links.extend(t for t in tokens if isinstance(t, InternalLink))

    take(raw.inline_tokens or [])
    for node in iter_nodes(list(raw.context_nodes or [])):
        if hasattr(node, "inline"):
            take(node.inline)
    for _, value in raw.template_params or []:
        if not isinstance(value, str):
            take(value)

    out: list[EntityLink] = []
    seen = set()
    for link in links:
        target = link.target.strip()
        if not target or ":" in target or target in seen:
            continue
        seen.add(target)
        record = sitelinks.lookup(raw.language_edition, target) if sitelinks else None
        out.append(
            EntityLink(
                surface=link.anchor or target,
                target_title=target,
                resolved_iri=record.wikidata_iri if record else None,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Person identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PersonRecord:
    canonical_label: str
    labels: tuple = ()  # ordered (language_code, label) pairs
    wikidata_iri: str | None = None
    dbpedia_iris: tuple = ()
    type_labels: tuple = ()

    def __post_init__(self):
        if not self.canonical_label:
            raise ValueError("canonical label must be nonempty")

    def identity_key(self) -> str:
        return self.wikidata_iri or f"label:{self.canonical_label}"

    def labels_map(self) -> dict:
        return dict(self.labels)


def _dbpedia_iri(language_code: str, title: str) -> str:
    slug = urlquote(title.replace(" ", "_"), safe="_()',.-!$&*+;=:@~")
    host = "dbpedia.org" if language_code == "en" else f"{language_code}.dbpedia.org"
    return f"http://{host}/resource/{slug}"


def wikiquote_iri(language_code: str, title: str) -> str:
    slug = urlquote(title.replace(" ", "_"), safe="_()',.-!$&*+;=:@~")
    return f"https://{language_code}.wikiquote.org/wiki/{slug}"


def resolve_identity(person_title: str, language_edition: str, sitelinks) -> PersonRecord:
    record = sitelinks.lookup(language_edition, person_title) if sitelinks else None
    if record is None or not record.wikidata_iri:
        return PersonRecord(
            canonical_label=person_title,
            labels=((language_edition, person_title),),
            wikidata_iri=record.wikidata_iri if record else None,
            dbpedia_iris=(
                (_dbpedia_iri(language_edition, person_title),) if record else ()
            ),
            type_labels=tuple(record.type_labels) if record else (),
        )
    siblings = sitelinks.records_for_identity(record.wikidata_iri)
    labels = {}
    dbpedia = []
    types = []
    for sib in sorted(siblings, key=lambda r: r.language_code):
        labels.setdefault(sib.language_code, sib.title)
        dbpedia.append(_dbpedia_iri(sib.language_code, sib.title))
        for t in sib.type_labels:
            if t not in types:
                types.append(t)
    canonical = labels.get("en") or labels[min(labels)]
    return PersonRecord(
        canonical_label=canonical,
        labels=tuple(sorted(labels.items())),
        wikidata_iri=record.wikidata_iri,
        dbpedia_iris=tuple(dict.fromkeys(dbpedia)),
        type_labels=tuple(types),
    )


# ---------------------------------------------------------------------------
# Mentions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuoteMention:
    mention_id: str
    person: PersonRecord
    text: str
    language: str
    contexts: tuple = ()
    date: PartialDate | None = None
    misattributed: bool = False
    sentiment: Sentiment | None = None
    entity_links: tuple = ()
    language_edition: str = ""

    def __post_init__(self):
        if not self.text:
            raise ValueError("mention text must be nonempty")


@dataclass
class EnrichStats:
    invalid_urls: int = 0
    degraded: bool = False


def _mention_id(person: PersonRecord, raw, kind: str) -> str:
    basis = "|".join(
        [
            person.identity_key(),
            raw.language_edition,
            str(raw.ordinal),
            "/".join(raw.section_path),
            kind,
        ]
    )
    return hashlib.blake2b(basis.encode("utf-8"), digest_size=8).hexdigest()


def enrich_many(raws, rules, sitelinks, backend, stats: EnrichStats | None = None):
    """Enrich a batch of raw quotes (typically one page). Language detection
    and sentiment are requested in one batch per call; a backend failure
    degrades the whole batch to the offline fallback, never mixing sources."""
    stats = stats if stats is not None else EnrichStats()
    raws = list(raws)
    texts = []
    slots = []  # (raw_index, kind)
    for i, raw in enumerate(raws):
        texts.append(raw.text)
        slots.append((i, "main"))
        if raw.original_text:
            texts.append(raw.original_text)
            slots.append((i, "original"))

    if texts:
        try:
            languages = backend.detect_language(texts)
            sentiments = backend.sentiment(texts)
        except BackendUnavailable:
            fallback = FallbackBackend()
            languages = fallback.detect_language(texts)
            sentiments = fallback.sentiment(texts)
            stats.degraded = True
    else:
        languages, sentiments = [], []
    if getattr(backend, "is_fallback", False):
        stats.degraded = True

    by_slot = {
        slot: (languages[j], sentiments[j]) for j, slot in enumerate(slots)
    }

    mentions = []
    for i, raw in enumerate(raws):
        person = resolve_identity(raw.person_title, raw.language_edition, sitelinks)
        contexts = tuple(build_contexts(raw, rules, stats))
        date = extract_date(
            raw.template_params,
            raw.section_path,
            [c.context_text for c in contexts if c.context_text],
            rules,
        )
        links = tuple(collect_entity_links(raw, sitelinks))

        detected, sentiment = by_slot[(i, "main")]
        mentions.append(
            QuoteMention(
                mention_id=_mention_id(person, raw, "main"),
                person=person,
                text=raw.text,
                language=detected or raw.language_edition,
                contexts=contexts,
                date=date,
                misattributed=raw.misattributed,
                sentiment=sentiment,
                entity_links=links,
                language_edition=raw.language_edition,
            )
        )
        if raw.original_text:
            detected, sentiment = by_slot[(i, "original")]
            mentions.append(
                QuoteMention(
                    mention_id=_mention_id(person, raw, "original"),
                    person=person,
                    text=raw.original_text,
                    language=detected or raw.original_language_hint or raw.language_edition,
                    contexts=contexts,
                    date=date,
                    misattributed=raw.misattributed,
                    sentiment=sentiment,
                    entity_links=links,
                    language_edition=raw.language_edition,
                )
            )
    return mentions, stats


def enrich(raw, rules, sitelinks, backend):
    """Mentions for one raw quote: one for its text, plus one for the
    original-language text when the template carries it."""
    mentions, _ = enrich_many([raw], rules, sitelinks, backend)
    return mentions


# ---------------------------------------------------------------------------
# (De)serialization for ndjson intermediates
# ---------------------------------------------------------------------------

def date_to_dict(date: PartialDate | None):
    if date is None:
        return None
    return {"year": date.year, "month": date.month, "day": date.day}


def date_from_dict(data) -> PartialDate | None:
    if data is None:
        return None
    return PartialDate(data["year"], data.get("month"), data.get("day"))


def person_to_dict(person: PersonRecord) -> dict:
    return {
        "canonical_label": person.canonical_label,
        "labels": [list(p) for p in person.labels],
        "wikidata_iri": person.wikidata_iri,
        "dbpedia_iris": list(person.dbpedia_iris),
        "type_labels": list(person.type_labels),
    }


def person_from_dict(data: dict) -> PersonRecord:
    return PersonRecord(
        canonical_label=data["canonical_label"],
        labels=tuple((l, v) for l, v in data["labels"]),
        wikidata_iri=data.get("wikidata_iri"),
        dbpedia_iris=tuple(data.get("dbpedia_iris") or ()),
        type_labels=tuple(data.get("type_labels") or ()),
    )


def mention_to_dict(m: QuoteMention) -> dict:
    return {
        "mention_id": m.mention_id,
        "person": person_to_dict(m.person),
        "text": m.text,
        "language": m.language,
        "contexts": [
            {
                "context_text": c.context_text,
                "source_urls": list(c.source_urls),
                "origin_label": c.origin_label,
            }
            for c in m.contexts
        ],
        "date": date_to_dict(m.date),
        "misattributed": m.misattributed,
        "sentiment": (
            {"category": m.sentiment.category, "score": m.sentiment.score}
            if m.sentiment
            else None
        ),
        "entity_links": [
            {"surface": e.surface, "target_title": e.target_title, "resolved_iri": e.resolved_iri}
            for e in m.entity_links
        ],
        "language_edition": m.language_edition,
    }


def mention_from_dict(data: dict) -> QuoteMention:
    return QuoteMention(
        mention_id=data["mention_id"],
        person=person_from_dict(data["person"]),
        text=data["text"],
        language=data["language"],
        contexts=tuple(
            ContextRecord(
                context_text=c.get("context_text"),
                source_urls=tuple(c.get("source_urls") or ()),
                origin_label=c.get("origin_label"),
            )
            for c in data.get("contexts") or ()
        ),
        date=date_from_dict(data.get("date")),
        misattributed=bool(data.get("misattributed")),
        sentiment=(
            Sentiment(data["sentiment"]["category"], data["sentiment"]["score"])
            if data.get("sentiment")
            else None
        ),
        entity_links=tuple(
            EntityLink(e["surface"], e["target_title"], e.get("resolved_iri"))
            for e in data.get("entity_links") or ()
        ),
        language_edition=data.get("language_edition", ""),
    )
