"""Four-stage pipeline driver with resumable ndjson intermediates:
extract -> enrich -> align -> emit."""

from __future__ import annotations

import json
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import alignment, enrichment, evaluation, extraction, ingest, rdf, rules as rules_mod
from .nlp import make_backend
from .wikitext import parse_page

RAW_QUOTES_FILE = "raw_quotes.ndjson"
MENTIONS_FILE = "mentions.ndjson"
CLUSTERS_FILE = "clusters.ndjson"
REPORT_FILE = "report.json"

_DUMP_NAME_RE = re.compile(r"^([a-z]{2,3}(?:-[a-z]+)?)(?:wikiquote.*)?\.xml(?:\.bz2)?$")


class PipelineError(Exception):
    pass


@dataclass
class PipelineConfig:
    dumps_dir: str = "fixtures/dumps"
    sitelinks_path: str = "fixtures/sitelinks.tsv"
    out_dir: str = "out"
    languages: list | None = None
    rules_path: str | None = None
    nlp_endpoint: str | None = None
    threshold: float = alignment.DEFAULT_THRESHOLD
    fmt: str = "both"  # ntriples | turtle | both
    min_pages: int = 50
    jobs: int = 1
    base_iri: str = rdf.DEFAULT_BASE_IRI
    emit_raw_copy: str | None = None
    dump_clusters_copy: str | None = None

    def validate(self):
        if not 0.0 < self.threshold <= 1.0:
            raise rules_mod.ConfigError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.fmt not in ("ntriples", "turtle", "both"):
            raise rules_mod.ConfigError(f"unknown output format {self.fmt!r}")
        if self.min_pages < 0:
            raise rules_mod.ConfigError("min-pages must be >= 0")
        if self.jobs < 1:
            raise rules_mod.ConfigError("jobs must be >= 1")
        os.makedirs(self.out_dir, exist_ok=True)
        if not os.access(self.out_dir, os.W_OK):
            raise rules_mod.ConfigError(f"output dir not writable: {self.out_dir}")

    def load_rules(self):
        if self.rules_path:
            return rules_mod.load_rules(self.rules_path)
        return rules_mod.load_default_rules()

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)


@dataclass
class PipelineReport:
    counters: dict = field(default_factory=dict)
    degraded: bool = False

    def merge(self, other: "PipelineReport"):
        self.counters.update(other.counters)
        self.degraded = self.degraded or other.degraded


def _write_ndjson(path: str, header: dict, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False, sort_keys=True) + "\n")
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _read_ndjson(path: str, expected_format: str, stage_hint: str):
    if not os.path.exists(path):
        raise PipelineError(
            f"missing intermediate {path}; run the '{stage_hint}' stage first"
        )
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise PipelineError(f"{path}: empty intermediate file")
        header = json.loads(header_line)
        if header.get("format") != expected_format:
            raise PipelineError(
                f"{path}: expected format {expected_format!r}, found {header.get('format')!r}"
            )
        rows = [json.loads(line) for line in fh if line.strip()]
    return header, rows


# ---------------------------------------------------------------------------
# Stage: extract
# ---------------------------------------------------------------------------

def discover_dumps(dumps_dir: str) -> list:
    if not os.path.isdir(dumps_dir):
        raise rules_mod.ConfigError(f"dumps dir not found: {dumps_dir}")
    found = []
    for name in sorted(os.listdir(dumps_dir)):
        m = _DUMP_NAME_RE.match(name)
        if not m:
            continue
        path = os.path.join(dumps_dir, name)
        found.append(
            ingest.DumpDescriptor(
                language_code=m.group(1),
                path=path,
                page_count_estimate=ingest.count_pages(path),
            )
        )
    return found


def stage_extract(config: PipelineConfig) -> PipelineReport:
    rules = config.load_rules()
    sitelinks = ingest.SitelinkIndex.load(config.sitelinks_path)
    descriptors = discover_dumps(config.dumps_dir)
    descriptors = ingest.select_editions(descriptors, config.min_pages)
    if config.languages:
        wanted = set(config.languages)
        descriptors = [d for d in descriptors if d.language_code in wanted]
    skipped_no_rules = [d.language_code for d in descriptors if d.language_code not in rules]
    descriptors = [d for d in descriptors if d.language_code in rules]

    def process(descriptor):
        stats = ingest.IngestStats()
        extraction_stats = extraction.ExtractionStats()
        ruleset = rules[descriptor.language_code]
        quotes = []
        person_pages = 0
        for page in ingest.stream_pages(descriptor, stats):
            if not ingest.is_person_page(page, sitelinks):
                continue
            person_pages += 1
            tree = parse_page(page.title, page.wikitext, page.language_code)
            quotes.extend(extraction.extract_quotes(tree, ruleset, extraction_stats))
        return descriptor.language_code, quotes, stats, extraction_stats, person_pages

    if config.jobs > 1 and len(descriptors) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(process, descriptors))
    else:
        results = [process(d) for d in descriptors]
    results.sort(key=lambda r: r[0])

    report = PipelineReport()
    all_quotes = []
    pages_seen = person_pages = redirects = empty_skipped = outside = 0
    for _, quotes, stats, extraction_stats, persons in results:
        all_quotes.extend(quotes)
        pages_seen += stats.pages_seen
        redirects += stats.redirects_dropped
        person_pages += persons
        empty_skipped += extraction_stats.empty_skipped
        outside += extraction_stats.outside_sections
    rows = [extraction.raw_quote_to_dict(q) for q in all_quotes]
    header = {
        "format": "quotekg/raw-quotes",
        "version": 1,
        "editions": [d.language_code for d in descriptors],
    }
    _write_ndjson(config.path(RAW_QUOTES_FILE), header, rows)
    if config.emit_raw_copy:
        _write_ndjson(config.emit_raw_copy, header, rows)
    report.counters.update(
        {
            "editions": [d.language_code for d in descriptors],
            "editions_without_rules": skipped_no_rules,
            "pages_seen": pages_seen,
            "person_pages": person_pages,
            "redirects_dropped": redirects,
            "raw_quotes": len(all_quotes),
            "empty_quotes_skipped": empty_skipped,
            "list_items_outside_quote_sections": outside,
        }
    )
    return report


# ---------------------------------------------------------------------------
# Stage: enrich
# ---------------------------------------------------------------------------

def stage_enrich(config: PipelineConfig) -> PipelineReport:
    rules = config.load_rules()
    sitelinks = ingest.SitelinkIndex.load(config.sitelinks_path)
    _, rows = _read_ndjson(config.path(RAW_QUOTES_FILE), "quotekg/raw-quotes", "extract")
    raws = [extraction.raw_quote_from_dict(r) for r in rows]

    backend, unavailable = make_backend(config.nlp_endpoint)
    requested = bool(config.nlp_endpoint or os.environ.get("QUOTEKG_NLP_ENDPOINT"))
    stats = enrichment.EnrichStats(degraded=unavailable)

    pages: dict = {}
    order = []
    for raw in raws:
        key = (raw.language_edition, raw.person_title)
        if key not in pages:
            pages[key] = []
            order.append(key)
        pages[key].append(raw)

    mentions = []
    for key in order:
        edition = key[0]
        ruleset = rules.get(edition)
        if ruleset is None:
            raise PipelineError(f"no ruleset for edition {edition!r}")
        batch, _ = enrichment.enrich_many(pages[key], ruleset, sitelinks, backend, stats)
        mentions.extend(batch)

    header = {
        "format": "quotekg/mentions",
        "version": 1,
        "degraded": stats.degraded,
        "backend_tag": getattr(backend, "model_tag", "unknown"),
    }
    _write_ndjson(
        config.path(MENTIONS_FILE),
        header,
        (enrichment.mention_to_dict(m) for m in mentions),
    )
    report = PipelineReport(degraded=stats.degraded and requested)
    report.counters.update(
        {
            "mentions": len(mentions),
            "mentions_with_original": sum(
                1 for r in raws if r.original_text is not None
            ),
            "invalid_source_urls": stats.invalid_urls,
            "enrich_degraded": stats.degraded,
        }
    )
    return report


# ---------------------------------------------------------------------------
# Stage: align
# ---------------------------------------------------------------------------

def stage_align(config: PipelineConfig) -> PipelineReport:
    _, rows = _read_ndjson(config.path(MENTIONS_FILE), "quotekg/mentions", "enrich")
    mentions = [enrichment.mention_from_dict(r) for r in rows]
    backend, unavailable = make_backend(config.nlp_endpoint)
    requested = bool(config.nlp_endpoint or os.environ.get("QUOTEKG_NLP_ENDPOINT"))

    by_person: dict = {}
    for mention in mentions:
        by_person.setdefault(mention.person.identity_key(), []).append(mention)

    def process(key):
        return key, alignment.align_person(by_person[key], backend, config.threshold)

    keys = sorted(by_person)
    if config.jobs > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = dict(pool.map(process, keys))
    else:
        results = dict(process(key) for key in keys)

    clusters = []
    tags = set()
    for key in keys:
        person_clusters, tag = results[key]
        tags.add(tag)
        clusters.extend(person_clusters)

    header = {
        "format": "quotekg/clusters",
        "version": 1,
        "embedding_tags": sorted(tags),
        "threshold": config.threshold,
    }
    rows_out = [alignment.cluster_to_dict(c) for c in clusters]
    _write_ndjson(config.path(CLUSTERS_FILE), header, rows_out)
    if config.dump_clusters_copy:
        _write_ndjson(config.dump_clusters_copy, header, rows_out)

    degraded = alignment.FALLBACK_TAG in tags
    report = PipelineReport(degraded=degraded and requested)
    report.counters.update(
        {
            "persons": len(keys),
            "clusters": len(clusters),
            "multi_mention_clusters": sum(
                1 for c in clusters if len(c.member_mentions) > 1
            ),
            "embedding_tags": sorted(tags),
        }
    )
    return report


# ---------------------------------------------------------------------------
# Stage: emit
# ---------------------------------------------------------------------------

def stage_emit(config: PipelineConfig) -> PipelineReport:
    _, rows = _read_ndjson(config.path(CLUSTERS_FILE), "quotekg/clusters", "align")
    clusters = [alignment.cluster_from_dict(r) for r in rows]
    policy = rdf.IriPolicy(base_iri=config.base_iri)
    graph = rdf.TripleGraph()

    emitted_persons = {}
    for cluster in clusters:
        key = cluster.person.identity_key()
        if key not in emitted_persons:
            emitted_persons[key] = cluster.person
    for key in sorted(emitted_persons):
        rdf.emit_person(emitted_persons[key], policy, graph)
    for cluster in clusters:
        rdf.emit_quote(cluster, policy, graph)
    graph.validate_shapes()

    if config.fmt in ("ntriples", "both"):
        with open(config.path("quotekg.nt"), "wb") as fh:
            fh.write(rdf.serialize_ntriples(graph))
    if config.fmt in ("turtle", "both"):
        with open(config.path("quotekg.ttl"), "wb") as fh:
            fh.write(rdf.serialize_turtle(graph))

    stats = evaluation.stats_from_clusters(clusters)
    stats.total_triples = len(graph)
    void_graph = rdf.emit_void(stats, policy)
    with open(config.path("void.ttl"), "wb") as fh:
        fh.write(rdf.serialize_turtle(void_graph))

    report = PipelineReport()
    report.counters.update(
        {
            "triples": len(graph),
            "void_triples": len(void_graph),
            "emitted_persons": len(emitted_persons),
            "emitted_quotes": len(clusters),
            "emitted_mentions": sum(len(c.member_mentions) for c in clusters),
        }
    )
    return report


STAGES = {
    "extract": stage_extract,
    "enrich": stage_enrich,
    "align": stage_align,
    "emit": stage_emit,
}


def run(stage: str, config: PipelineConfig) -> PipelineReport:
    """Run one stage or `all`. Writes report.json in the output dir."""
    config.validate()
    report = PipelineReport()
    if stage == "all":
        for name in ("extract", "enrich", "align", "emit"):
            report.merge(STAGES[name](config))
    elif stage in STAGES:
        report.merge(STAGES[stage](config))
    else:
        raise rules_mod.ConfigError(f"unknown stage {stage!r}")
    payload = {"counters": report.counters, "degraded": report.degraded}
    with open(config.path(REPORT_FILE), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n")
    return report
