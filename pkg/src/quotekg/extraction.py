"""Harvest quotes from a parsed page tree using the per-language rules."""

from __future__ import annotations

from dataclasses import dataclass, field

from .rules import SectionKind, classify_section
from .wikitext import (
    ListItem,
    PageTree,
    Section,
    Template,
    node_from_dict,
    node_to_dict,
    strip_markup,
    template_value,
)


@dataclass
class RawQuote:
    person_title: str
    language_edition: str
    text: str
    original_text: str | None = None
    original_language_hint: str | None = None
    section_path: list = field(default_factory=list)
    misattributed: bool = False
    context_nodes: list = field(default_factory=list)
    template_params: list | None = None
    inline_tokens: list = field(default_factory=list)
    ordinal: int = 0  # document-order position within the page, for stable ids


@dataclass
class ExtractionStats:
    empty_skipped: int = 0
    outside_sections: int = 0


def extract_quotes(tree: PageTree, rules, stats: ExtractionStats | None = None) -> list[RawQuote]:
    """Quotes of one person page.

    List items are harvested inside sections recognized as quote or
    misattributed sections (deeper list items become the quote's context);
    quote-carrying templates are harvested anywhere except inside sections
    about the person. Sections about the person never contribute.
    """
    stats = stats if stats is not None else ExtractionStats()
    quotes: list[RawQuote] = []
    counter = {"ordinal": 0}

    def walk(nodes, path, state):
        # state: "none" | "quotes" | "misattributed" | "about" | "context"
        for node in nodes:
            if isinstance(node, Section):
                kind = classify_section(node.title, rules)
                if kind is SectionKind.MISATTRIBUTED:
                    child_state = "misattributed"
                elif kind is SectionKind.ABOUT:
                    child_state = "about"
                elif kind is SectionKind.QUOTES:
                    child_state = "quotes"
                elif kind is SectionKind.CONTEXT:
                    child_state = "context"
                else:
                    child_state = state
                walk(node.children, path + [node.title], child_state)
            elif isinstance(node, ListItem):
                if state in ("quotes", "misattributed"):
                    _harvest_item(node, path, state)
                elif strip_markup(node.inline):
                    stats.outside_sections += 1
            elif isinstance(node, Template):
                if state != "about":
                    _harvest_template(node, path, state)

    def _harvest_item(item, path, state):
        counter["ordinal"] += 1
        text = strip_markup(item.inline)
        if not text:
            stats.empty_skipped += 1
            return
        quotes.append(
            RawQuote(
                person_title=tree.page_title,
                language_edition=tree.language_code,
                text=text,
                section_path=list(path),
                misattributed=state == "misattributed",
                context_nodes=list(item.children),
                template_params=None,
                inline_tokens=list(item.inline),
                ordinal=counter["ordinal"],
            )
        )

    def _harvest_template(template, path, state):
        if template.name.strip().lower() not in rules.quote_template_names:
            return
        counter["ordinal"] += 1
        text = template_value(template, ["1"])
        if not text:
            stats.empty_skipped += 1
            return
        original = template_value(template, rules.original_text_keys)
        hint = template_value(template, rules.original_language_keys)
        quotes.append(
            RawQuote(
                person_title=tree.page_title,
                language_edition=tree.language_code,
                text=text,
                original_text=original or None,
                original_language_hint=hint or None,
                section_path=list(path),
                misattributed=state == "misattributed",
                context_nodes=[],
                template_params=list(template.params),
                inline_tokens=[],
                ordinal=counter["ordinal"],
            )
        )

    walk(tree.root, [], "none")
    return quotes


# ---------------------------------------------------------------------------
# ndjson round-trip
# ---------------------------------------------------------------------------

def raw_quote_to_dict(raw: RawQuote) -> dict:
    return {
        "person_title": raw.person_title,
        "language_edition": raw.language_edition,
        "text": raw.text,
        "original_text": raw.original_text,
        "original_language_hint": raw.original_language_hint,
        "section_path": list(raw.section_path),
        "misattributed": raw.misattributed,
        "context_nodes": [node_to_dict(n) for n in raw.context_nodes],
        "template_params": (
            [[k, [node_to_dict(t) for t in v]] for k, v in raw.template_params]
            if raw.template_params is not None
            else None
        ),
        "inline_tokens": [node_to_dict(t) for t in raw.inline_tokens],
        "ordinal": raw.ordinal,
    }


def raw_quote_from_dict(data: dict) -> RawQuote:
    return RawQuote(
        person_title=data["person_title"],
        language_edition=data["language_edition"],
        text=data["text"],
        original_text=data.get("original_text"),
        original_language_hint=data.get("original_language_hint"),
        section_path=list(data.get("section_path") or []),
        misattributed=bool(data.get("misattributed")),
        context_nodes=[node_from_dict(n) for n in data.get("context_nodes") or []],
        template_params=(
            [(k, [node_from_dict(t) for t in v]) for k, v in data["template_params"]]
            if data.get("template_params") is not None
            else None
        ),
        inline_tokens=[node_from_dict(t) for t in data.get("inline_tokens") or []],
        ordinal=int(data.get("ordinal") or 0),
    )
