"""RDF triple model, schema emission and deterministic serialization.

The writer is byte-stable: N-Triples output is the sorted set of triple
lines, Turtle groups by subject with sorted predicates and objects.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from urllib.parse import quote as urlquote

from .enrichment import Precision, wikiquote_iri
from .evaluation import CorpusStats

# Namespace table. Resource IRIs are minted under IriPolicy.base_iri; the
# vocabulary namespace stays fixed so data remains comparable across builds.
NS = {
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
    "owl": "http://www.w3.org/2002/07/owl#",
    "xsd": "http://www.w3.org/2001/XMLSchema#",
    "skos": "http://www.w3.org/2004/02/skos/core#",
    "so": "https://schema.org/",
    "qkg": "https://quotekg.example.org/vocab#",
    "onyx": "http://www.gsi.upm.es/ontologies/onyx/ns#",
    "void": "http://rdfs.org/ns/void#",
    "dcterms": "http://purl.org/dc/terms/",
    "wd": "https://www.wikidata.org/entity/",
}


def _term(prefix: str, local: str) -> str:
    return NS[prefix] + local


RDF_TYPE = _term("rdf", "type")
SO_PERSON = _term("so", "Person")
SO_QUOTATION = _term("so", "Quotation")
SO_SPOKEN_BY = _term("so", "spokenByCharacter")
SO_DATE_CREATED = _term("so", "dateCreated")
SO_MENTIONS = _term("so", "mentions")
SO_TEXT = _term("so", "text")
SO_SOURCE = _term("so", "source")
SO_ADDITIONAL_TYPE = _term("so", "additionalType")
SKOS_PREF_LABEL = _term("skos", "prefLabel")
OWL_SAME_AS = _term("owl", "sameAs")
QKG_MENTION = _term("qkg", "Mention")
QKG_CONTEXT = _term("qkg", "Context")
QKG_HAS_MENTION = _term("qkg", "hasMention")
QKG_HAS_CONTEXT = _term("qkg", "hasContext")
QKG_CONTEXT_TEXT = _term("qkg", "contextText")
QKG_ORIGIN_LABEL = _term("qkg", "originLabel")
QKG_IS_MISATTRIBUTED = _term("qkg", "isMisattributed")
ONYX_HAS_EMOTION_SET = _term("onyx", "hasEmotionSet")
ONYX_HAS_EMOTION = _term("onyx", "hasEmotion")
ONYX_EMOTION_SET = _term("onyx", "EmotionSet")
ONYX_EMOTION = _term("onyx", "Emotion")
ONYX_CATEGORY = _term("onyx", "hasEmotionCategory")
ONYX_INTENSITY = _term("onyx", "hasEmotionIntensity")
XSD = {name: _term("xsd", name) for name in ("date", "gYear", "gYearMonth", "boolean", "decimal", "integer")}

SENTIMENT_CATEGORY_IRI = {
    "positive": _term("qkg", "PositiveSentiment"),
    "negative": _term("qkg", "NegativeSentiment"),
    "neutral": _term("qkg", "NeutralSentiment"),
}

LICENSE_IRI = "https://creativecommons.org/licenses/by-sa/4.0/"


@dataclass(frozen=True)
class IRI:
    value: str

    def __post_init__(self):
        if not re.match(r"^[A-Za-z][A-Za-z0-9+.-]*:", self.value):
            raise ValueError(f"not an absolute IRI: {self.value!r}")
        if any(ch in self.value for ch in ' <>"{}|\\^`\n\r\t'):
            raise ValueError(f"illegal character in IRI: {self.value!r}")


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str | None = None
    lang: str | None = None

    def __post_init__(self):
        if self.datatype and self.lang:
            raise ValueError("literal cannot carry both datatype and language")


Term = IRI | Literal
Triple = tuple[IRI, IRI, Term]


class TripleGraph:
    def __init__(self):
        self._triples: set = set()
        self.namespaces = dict(NS)

    def add(self, subject, predicate, obj):
        s = subject if isinstance(subject, IRI) else IRI(subject)
        p = predicate if isinstance(predicate, IRI) else IRI(predicate)
        if not isinstance(obj, (IRI, Literal)):
            raise TypeError(f"object must be IRI or Literal, got {type(obj)}")
        self._triples.add((s, p, obj))
        return s, p, obj

    def __len__(self):
        return len(self._triples)

    def __iter__(self):
        return iter(self._triples)

    def triples(self):
        return set(self._triples)

    def update(self, other: "TripleGraph"):
        self._triples |= other._triples

    def objects(self, subject=None, predicate=None):
        for s, p, o in self._triples:
            if (subject is None or s.value == subject) and (
                predicate is None or p.value == predicate
            ):
                yield s, p, o

    def validate_shapes(self):
        """Domain/range and cardinality rules of the quote schema."""
        types: dict[str, set] = {}
        for s, p, o in self._triples:
            if p.value == RDF_TYPE and isinstance(o, IRI):
                types.setdefault(s.value, set()).add(o.value)

        def typed(node: str, cls: str) -> bool:
            return cls in types.get(node, ())

        problems = []
        mention_parents: dict[str, set] = {}
        spoken_by: dict[str, int] = {}
        for s, p, o in self._triples:
            if p.value == QKG_HAS_MENTION:
                if not typed(s.value, SO_QUOTATION):
                    problems.append(f"hasMention subject not a Quotation: {s.value}")
                if not (isinstance(o, IRI) and typed(o.value, QKG_MENTION)):
                    problems.append(f"hasMention object not a Mention: {o}")
                else:
                    mention_parents.setdefault(o.value, set()).add(s.value)
            elif p.value == QKG_HAS_CONTEXT:
                if not typed(s.value, QKG_MENTION):
                    problems.append(f"hasContext subject not a Mention: {s.value}")
                if not (isinstance(o, IRI) and typed(o.value, QKG_CONTEXT)):
                    problems.append(f"hasContext object not a Context: {o}")
            elif p.value == SO_SPOKEN_BY:
                if not typed(s.value, SO_QUOTATION):
                    problems.append(f"spokenByCharacter subject not a Quotation: {s.value}")
                if not (isinstance(o, IRI) and typed(o.value, SO_PERSON)):
                    problems.append(f"spokenByCharacter object not a Person: {o}")
                spoken_by[s.value] = spoken_by.get(s.value, 0) + 1

        for node, node_types in types.items():
            if SO_QUOTATION in node_types and spoken_by.get(node, 0) != 1:
                problems.append(
                    f"Quotation must have exactly one spokenByCharacter: {node} "
                    f"has {spoken_by.get(node, 0)}"
                )
            if QKG_MENTION in node_types and len(mention_parents.get(node, ())) != 1:
                problems.append(
                    f"Mention must hang off exactly one Quotation: {node} "
                    f"has {len(mention_parents.get(node, ()))}"
                )
        if problems:
            raise ValueError("graph violates schema shapes:\n" + "\n".join(sorted(problems)))


# ---------------------------------------------------------------------------
# IRI minting
# ---------------------------------------------------------------------------

DEFAULT_BASE_IRI = "https://quotekg.example.org/resource/"


def slugify(label: str) -> str:
    slug = re.sub(r"\s+", "_", label.strip().lower())
    return urlquote(slug, safe="_-")


@dataclass
class IriPolicy:
    base_iri: str = DEFAULT_BASE_IRI
    _minted: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.base_iri.endswith("/"):
            self.base_iri += "/"
        IRI(self.base_iri + "x")  # fail fast on an unusable base

    def _mint(self, kind: str, local: str, basis) -> IRI:
        iri = f"{self.base_iri}{kind}/{local}"
        prior = self._minted.get(iri)
        if prior is not None and prior != basis:
            raise ValueError(f"IRI collision: {iri} minted for {prior!r} and {basis!r}")
        self._minted[iri] = basis
        return IRI(iri)

    def person_iri(self, person) -> IRI:
        return self._mint("person", slugify(person.canonical_label), person.identity_key())

    def quote_iri(self, cluster) -> IRI:
        return self._mint("quote", cluster.quote_id, cluster.quote_id)

    def mention_iri(self, mention) -> IRI:
        return self._mint("mention", mention.mention_id, mention.mention_id)

    def context_iri(self, mention, index: int) -> IRI:
        local = f"{mention.mention_id}-{index}"
        return self._mint("context", local, local)

    def sentiment_iri(self, cluster, which: str) -> IRI:
        local = f"{cluster.quote_id}-{which}"
        return self._mint("sentiment", local, local)

    def dataset_iri(self, suffix: str = "") -> IRI:
        return IRI(f"{self.base_iri}dataset{suffix}")


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _date_literal(date) -> Literal:
    if date.precision is Precision.DAY:
        return Literal(date.isoformat(), datatype=XSD["date"])
    if date.precision is Precision.MONTH:
        return Literal(date.isoformat(), datatype=XSD["gYearMonth"])
    return Literal(date.isoformat(), datatype=XSD["gYear"])


def emit_person(person, policy: IriPolicy, graph: TripleGraph | None = None) -> TripleGraph:
    graph = graph if graph is not None else TripleGraph()
    node = policy.person_iri(person)
    graph.add(node, RDF_TYPE, IRI(SO_PERSON))
    graph.add(node, SKOS_PREF_LABEL, Literal(person.canonical_label))
    for language, label in person.labels:
        graph.add(node, SKOS_PREF_LABEL, Literal(label, lang=language))
        # wikiquote sameAs links only for identity-confirmed persons
        if person.wikidata_iri:
            graph.add(node, OWL_SAME_AS, IRI(wikiquote_iri(language, label)))
    if person.wikidata_iri:
        graph.add(node, OWL_SAME_AS, IRI(person.wikidata_iri))
    for iri in person.dbpedia_iris:
        graph.add(node, OWL_SAME_AS, IRI(iri))
    for type_label in person.type_labels:
        graph.add(node, SO_ADDITIONAL_TYPE, Literal(type_label))
    return graph


def emit_quote(cluster, policy: IriPolicy, graph: TripleGraph | None = None) -> TripleGraph:
    graph = graph if graph is not None else TripleGraph()
    quote = policy.quote_iri(cluster)
    person = policy.person_iri(cluster.person)
    graph.add(quote, RDF_TYPE, IRI(SO_QUOTATION))
    graph.add(quote, SO_SPOKEN_BY, person)
    graph.add(
        quote,
        QKG_IS_MISATTRIBUTED,
        Literal("true" if cluster.misattributed else "false", datatype=XSD["boolean"]),
    )
    if cluster.aggregated_date is not None:
        graph.add(quote, SO_DATE_CREATED, _date_literal(cluster.aggregated_date))

    linked = {}
    for mention in cluster.member_mentions:
        for link in mention.entity_links:
            if link.resolved_iri:
                linked.setdefault(link.resolved_iri, link)
    for iri in sorted(linked):
        graph.add(quote, SO_MENTIONS, IRI(iri))

    if cluster.aggregated_sentiment is not None:
        emotion_set = policy.sentiment_iri(cluster, "set")
        emotion = policy.sentiment_iri(cluster, "emotion")
        graph.add(quote, ONYX_HAS_EMOTION_SET, emotion_set)
        graph.add(emotion_set, RDF_TYPE, IRI(ONYX_EMOTION_SET))
        graph.add(emotion_set, ONYX_HAS_EMOTION, emotion)
        graph.add(emotion, RDF_TYPE, IRI(ONYX_EMOTION))
        graph.add(
            emotion,
            ONYX_CATEGORY,
            IRI(SENTIMENT_CATEGORY_IRI[cluster.aggregated_sentiment.category]),
        )
        graph.add(
            emotion,
            ONYX_INTENSITY,
            Literal(f"{cluster.aggregated_sentiment.score:.4f}", datatype=XSD["decimal"]),
        )

    for mention in cluster.member_mentions:
        m_node = policy.mention_iri(mention)
        graph.add(quote, QKG_HAS_MENTION, m_node)
        graph.add(m_node, RDF_TYPE, IRI(QKG_MENTION))
        graph.add(m_node, SO_TEXT, Literal(mention.text, lang=mention.language))
        for index, context in enumerate(mention.contexts, start=1):
            c_node = policy.context_iri(mention, index)
            graph.add(m_node, QKG_HAS_CONTEXT, c_node)
            graph.add(c_node, RDF_TYPE, IRI(QKG_CONTEXT))
            if context.context_text:
                graph.add(c_node, QKG_CONTEXT_TEXT, Literal(context.context_text))
            if context.origin_label:
                graph.add(c_node, QKG_ORIGIN_LABEL, Literal(context.origin_label))
            for url in context.source_urls:
                graph.add(c_node, SO_SOURCE, IRI(url))
    return graph


def emit_void(stats: CorpusStats, policy: IriPolicy, graph: TripleGraph | None = None) -> TripleGraph:
    graph = graph if graph is not None else TripleGraph()
    dataset = policy.dataset_iri()
    graph.add(dataset, RDF_TYPE, IRI(_term("void", "Dataset")))
    graph.add(
        dataset,
        IRI(_term("void", "triples")),
        Literal(str(stats.total_triples or 0), datatype=XSD["integer"]),
    )
    graph.add(dataset, IRI(_term("dcterms", "license")), IRI(LICENSE_IRI))
    graph.add(dataset, IRI(_term("void", "sparqlEndpoint")), IRI(f"{policy.base_iri}sparql"))
    for language in sorted(stats.per_language):
        row = stats.per_language[language]
        subset = policy.dataset_iri(f"/{language}")
        graph.add(dataset, IRI(_term("void", "subset")), subset)
        graph.add(subset, RDF_TYPE, IRI(_term("void", "Dataset")))
        graph.add(subset, IRI(_term("dcterms", "language")), Literal(language))
        for kind, cls, count in (
            ("quotes", SO_QUOTATION, len(row["quotes"])),
            ("mentions", QKG_MENTION, row["mentions"]),
            ("persons", SO_PERSON, len(row["persons"])),
        ):
            partition = policy.dataset_iri(f"/{language}/{kind}")
            graph.add(subset, IRI(_term("void", "classPartition")), partition)
            graph.add(partition, IRI(_term("void", "class")), IRI(cls))
            graph.add(
                partition,
                IRI(_term("void", "entities")),
                Literal(str(count), datatype=XSD["integer"]),
            )
    return graph


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_LITERAL_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape_literal(text: str) -> str:
    return "".join(_LITERAL_ESCAPES.get(ch, ch) for ch in text)


def _nt_term(term: Term) -> str:
    if isinstance(term, IRI):
        return f"<{term.value}>"
    rendered = f'"{_escape_literal(term.lexical)}"'
    if term.lang:
        return f"{rendered}@{term.lang}"
    if term.datatype:
        return f"{rendered}^^<{term.datatype}>"
    return rendered


def serialize_ntriples(graph: TripleGraph) -> bytes:
    lines = sorted(f"{_nt_term(s)} {_nt_term(p)} {_nt_term(o)} ." for s, p, o in graph)
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


_PN_LOCAL_RE = re.compile(r"^[A-Za-z0-9_]([A-Za-z0-9_.-]*[A-Za-z0-9_-])?$")


def _ttl_iri(iri: str, namespaces: dict) -> str:
    for prefix, ns in namespaces.items():
        if iri.startswith(ns):
            local = iri[len(ns):]
            if local and _PN_LOCAL_RE.match(local):
                return f"{prefix}:{local}"
    return f"<{iri}>"


def _ttl_term(term: Term, namespaces: dict) -> str:
    if isinstance(term, IRI):
        return _ttl_iri(term.value, namespaces)
    rendered = f'"{_escape_literal(term.lexical)}"'
    if term.lang:
        return f"{rendered}@{term.lang}"
    if term.datatype:
        return f"{rendered}^^{_ttl_iri(term.datatype, namespaces)}"
    return rendered


def serialize_turtle(graph: TripleGraph) -> bytes:
    namespaces = dict(sorted(graph.namespaces.items()))
    out = [f"@prefix {prefix}: <{ns}> ." for prefix, ns in namespaces.items()]
    out.append("")
    by_subject: dict[str, dict[str, list]] = {}
    for s, p, o in graph:
        by_subject.setdefault(s.value, {}).setdefault(p.value, []).append(o)
    for subject in sorted(by_subject):
        preds = by_subject[subject]
        lines = []
        for predicate in sorted(preds, key=lambda p: (p != RDF_TYPE, p)):
            objects = sorted(_ttl_term(o, namespaces) for o in preds[predicate])
            pred_txt = "a" if predicate == RDF_TYPE else _ttl_iri(predicate, namespaces)
            lines.append(f"    {pred_txt} {', '.join(objects)}")
        out.append(f"{_ttl_iri(subject, namespaces)}\n" + " ;\n".join(lines) + " .")
        out.append("")
    text = "\n".join(out).rstrip("\n")
    return (text + "\n").encode("utf-8")


def serialize(graph: TripleGraph, fmt: str) -> bytes:
    if fmt == "ntriples":
        return serialize_ntriples(graph)
    if fmt == "turtle":
        return serialize_turtle(graph)
    raise ValueError(f"unknown format {fmt!r} (expected ntriples or turtle)")


# ---------------------------------------------------------------------------
# Minimal N-Triples reader (for `stats --graph`; independent of the writer)
# ---------------------------------------------------------------------------

_NT_LINE_RE = re.compile(
    r"^(?P<s><[^>]*>|_:\S+)\s+"
    r"(?P<p><[^>]*>)\s+"
    r'(?P<o><[^>]*>|_:\S+|"(?:[^"\\]|\\.)*"(?:@[A-Za-z0-9-]+|\^\^<[^>]*>)?)\s*\.\s*$'
)
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t", "'": "'", "b": "\b", "f": "\f"}


def _unescape_literal(text: str) -> str:
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        nxt = text[i + 1]
        if nxt == "u":
            out.append(chr(int(text[i + 2 : i + 6], 16)))
            i += 6
        elif nxt == "U":
            out.append(chr(int(text[i + 2 : i + 10], 16)))
            i += 10
        else:
            out.append(_UNESCAPES[nxt])
            i += 2
    return "".join(out)


def parse_ntriples(data: bytes | str) -> set:
    """Triples from N-Triples text. Raises ValueError on malformed lines."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    triples = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _NT_LINE_RE.match(stripped)
        if not m:
            raise ValueError(f"line {line_no}: not a valid triple line: {line!r}")
        s_txt, p_txt, o_txt = m.group("s"), m.group("p"), m.group("o")
        if s_txt.startswith("_:") or o_txt.startswith("_:"):
            raise ValueError(f"line {line_no}: blank nodes are not produced by this writer")
        subject = IRI(s_txt[1:-1])
        predicate = IRI(p_txt[1:-1])
        if o_txt.startswith("<"):
            obj: Term = IRI(o_txt[1:-1])
        else:
            end = o_txt.rfind('"')
            lexical = _unescape_literal(o_txt[1:end])
            rest = o_txt[end + 1 :]
            if rest.startswith("@"):
                obj = Literal(lexical, lang=rest[1:])
            elif rest.startswith("^^<"):
                obj = Literal(lexical, datatype=rest[3:-1])
            else:
                obj = Literal(lexical)
        triples.add((subject, predicate, obj))
    return triples


def stats_from_graph(triples) -> CorpusStats:
    """Corpus statistics recomputed from emitted triples."""
    stats = CorpusStats()
    stats.total_triples = len(triples)
    types: dict[str, set] = {}
    text_lang: dict[str, str] = {}
    has_context: set = set()
    quote_person: dict[str, str] = {}
    quote_mentions: dict[str, list] = {}
    for s, p, o in triples:
        if p.value == RDF_TYPE and isinstance(o, IRI):
            types.setdefault(o.value, set()).add(s.value)
        elif p.value == SO_TEXT and isinstance(o, Literal):
            text_lang[s.value] = o.lang or ""
        elif p.value == QKG_HAS_CONTEXT:
            has_context.add(s.value)
        elif p.value == SO_SPOKEN_BY and isinstance(o, IRI):
            quote_person[s.value] = o.value
        elif p.value == QKG_HAS_MENTION and isinstance(o, IRI):
            quote_mentions.setdefault(s.value, []).append(o.value)

    persons_total = types.get(SO_PERSON, set())
    quotes_total = types.get(SO_QUOTATION, set())
    mentions_total = types.get(QKG_MENTION, set())
    stats.total_persons = len(persons_total)
    stats.total_quotes = len(quotes_total)
    stats.total_mentions = len(mentions_total)
    stats.total_mentions_with_context = len(mentions_total & has_context)

    for quote, mentions in quote_mentions.items():
        for mention in mentions:
            language = text_lang.get(mention, "")
            if not language:
                continue
            row = stats.language_row(language)
            row["quotes"].add(quote)
            row["mentions"] += 1
            if mention in has_context:
                row["mentions_with_context"] += 1
            person = quote_person.get(quote)
            if person:
                row["persons"].add(person)
    return stats
