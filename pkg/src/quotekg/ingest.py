"""Streaming access to MediaWiki XML export dumps and the sitelink index
used to pick person pages."""

from __future__ import annotations

import bz2
import io
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

_BZ2_MAGIC = b"BZh"


class IngestError(Exception):
    pass


@dataclass(frozen=True)
class DumpDescriptor:
    language_code: str
    path: str
    page_count_estimate: int = 0

    def __post_init__(self):
        if not self.language_code or self.language_code != self.language_code.lower():
            raise ValueError(f"language code must be non-empty lowercase: {self.language_code!r}")
        if self.page_count_estimate < 0:
            raise ValueError("page_count_estimate must be >= 0")


@dataclass(frozen=True)
class RawPage:
    title: str
    namespace_id: int
    wikitext: str
    revision_id: str
    language_code: str


@dataclass
class IngestStats:
    pages_seen: int = 0
    main_namespace: int = 0
    redirects_dropped: int = 0


def select_editions(descriptors, min_pages: int):
    """Keep editions with enough pages; Simple English is never admitted."""
    if min_pages < 0:
        raise ValueError("min_pages must be >= 0")
    return [
        d
        for d in descriptors
        if d.language_code != "simple" and d.page_count_estimate >= min_pages
    ]


class _CountingReader(io.RawIOBase):
    def __init__(self, fh):
        self._fh = fh
        self.bytes_read = 0

    def readable(self):
        return True

    def read(self, size=-1):
        chunk = self._fh.read(size)
        self.bytes_read += len(chunk)
        return chunk


def _open_dump(path: str):
    with open(path, "rb") as probe:
        magic = probe.read(3)
    if magic == _BZ2_MAGIC:
        return bz2.open(path, "rb")
    return open(path, "rb")


def _local(tag) -> str:
    tag = str(tag)
    return tag.rsplit("}", 1)[-1]


def _child_text(elem, name: str) -> str | None:
    for child in elem:
        if _local(child.tag) == name:
            return child.text or ""
    return None


def stream_pages(descriptor: DumpDescriptor, stats: IngestStats | None = None):
    """Yield every main-namespace, non-redirect page in document order.

    Memory stays bounded regardless of dump size: each page element is
    discarded as soon as it is yielded. Malformed XML raises IngestError
    naming the byte offset reached.
    """
    stats = stats if stats is not None else IngestStats()
    if not os.path.exists(descriptor.path):
        raise IngestError(f"dump file not found: {descriptor.path}")
    fh = _open_dump(descriptor.path)
    reader = _CountingReader(fh)
    try:
        root = None
        try:
            for event, elem in ET.iterparse(reader, events=("start", "end")):
                if event == "start":
                    if root is None:
                        root = elem
                    continue
                if _local(elem.tag) != "page":
                    continue
                stats.pages_seen += 1
                page = _page_from_elem(elem, descriptor.language_code, stats)
                elem.clear()
                if root is not None:
                    root.clear()
                if page is not None:
                    yield page
        except ET.ParseError as exc:
            raise IngestError(
                f"malformed XML in {descriptor.path} near byte {reader.bytes_read}: {exc}"
            ) from exc
    finally:
        fh.close()


def _page_from_elem(elem, language_code: str, stats: IngestStats) -> RawPage | None:
    ns_text = _child_text(elem, "ns")
    try:
        namespace_id = int(ns_text) if ns_text is not None else 0
    except ValueError:
        namespace_id = -1
    if namespace_id != 0:
        return None
    is_redirect = any(_local(child.tag) == "redirect" for child in elem)
    if is_redirect:
        stats.redirects_dropped += 1
        return None
    stats.main_namespace += 1
    title = _child_text(elem, "title") or ""
    wikitext = ""
    revision_id = ""
    for child in elem:
        if _local(child.tag) == "revision":
            revision_id = _child_text(child, "id") or ""
            for sub in child:
                if _local(sub.tag) == "text":
                    wikitext = sub.text or ""
    return RawPage(
        title=title,
        namespace_id=0,
        wikitext=wikitext,
        revision_id=revision_id,
        language_code=language_code,
    )


def count_pages(path: str) -> int:
    """Streaming count of <page> elements, for edition selection."""
    needle = b"<page>"
    count = 0
    carry = b""
    fh = _open_dump(path)
    try:
        while True:
            chunk = fh.read(1 << 16)
            if not chunk:
                break
            data = carry + chunk
            count += data.count(needle)
            carry = data[-(len(needle) - 1):]
    finally:
        fh.close()
    return count


# ---------------------------------------------------------------------------
# Sitelink index
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SitelinkRecord:
    language_code: str
    title: str
    wikidata_iri: str
    is_human: bool
    type_labels: tuple = ()


@dataclass
class SitelinkIndex:
    """Lookups are total: a missing key yields None, never an error."""

    _by_key: dict = field(default_factory=dict)
    _by_identity: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> "SitelinkIndex":
        index = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) != 5:
                    raise IngestError(
                        f"{path}:{line_no}: expected 5 tab-separated fields, got {len(fields)}"
                    )
                language, title, wikidata_iri, is_human, labels = fields
                record = SitelinkRecord(
                    language_code=language,
                    title=title,
                    wikidata_iri=wikidata_iri,
                    is_human=is_human.strip() == "1",
                    type_labels=tuple(l for l in labels.split(",") if l),
                )
                index.add(record)
        return index

    def add(self, record: SitelinkRecord):
        self._by_key[(record.language_code, record.title)] = record
        if record.wikidata_iri:
            self._by_identity.setdefault(record.wikidata_iri, []).append(record)

    def lookup(self, language_code: str, title: str) -> SitelinkRecord | None:
        record = self._by_key.get((language_code, title))
        if record is None and title:
            # MediaWiki titles are first-letter case-insensitive
            record = self._by_key.get((language_code, title[0].upper() + title[1:]))
        return record

    def records_for_identity(self, wikidata_iri: str) -> list:
        return list(self._by_identity.get(wikidata_iri, ()))


def is_person_page(page: RawPage, sitelinks: SitelinkIndex) -> bool:
    record = sitelinks.lookup(page.language_code, page.title)
    return record is not None and record.is_human
