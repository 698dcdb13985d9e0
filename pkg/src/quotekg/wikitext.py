"""Wikitext parsing into a page tree of sections, list items and templates.

The parser is total: any input string yields a PageTree. Constructs outside
the supported subset (headings, lists, bold/italic, templates, internal and
external links, <ref> tags) degrade to plain text and are recorded as
warnings, never as errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

MAX_TEMPLATE_DEPTH = 8

_COMMENT_RE = re.compile(r"<!--.*?(-->|\Z)", re.DOTALL)
_HEADING_RE = re.compile(r"^(={1,6})\s*(.*?)\s*(={1,6})\s*$")
_LIST_RE = re.compile(r"^([*#]+)\s*(.*)$")
_URL_SCHEME_RE = re.compile(r"(https?|ftp)://\S")
_REF_OPEN_RE = re.compile(r"<ref(\s[^<>/]*)?>", re.IGNORECASE)
_REF_SELFCLOSE_RE = re.compile(r"<ref(\s[^<>/]*)?/>", re.IGNORECASE)


# ---------------------------------------------------------------------------
# Tree node types
# ---------------------------------------------------------------------------

@dataclass
class Text:
    value: str
    bold: bool = False


@dataclass
class InternalLink:
    target: str
    anchor: str


@dataclass
class ExternalLink:
    url: str
    anchor: str


@dataclass
class Reference:
    content: str


Inline = Text | InternalLink | ExternalLink | Reference


@dataclass
class Section:
    title: str
    level: int
    children: list = field(default_factory=list)


@dataclass
class ListItem:
    depth: int
    inline: list = field(default_factory=list)
    children: list = field(default_factory=list)


@dataclass
class Template:
    name: str
    params: list = field(default_factory=list)  # ordered (key, list[Inline]) pairs


@dataclass
class TextBlock:
    """Plain prose outside any recognized construct."""

    inline: list = field(default_factory=list)


Node = Section | ListItem | Template | TextBlock


@dataclass
class PageTree:
    page_title: str
    language_code: str
    root: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Inline tokenizer
# ---------------------------------------------------------------------------

class _InlineScanner:
    """Single pass, linear-time scanner for inline markup within one logical line."""

    def __init__(self, warnings: list, line_no: int, depth: int = 0):
        self.warnings = warnings
        self.line_no = line_no
        self.depth = depth

    def scan(self, text: str) -> list:
        tokens: list = []
        buf: list[str] = []
        bold = False
        i = 0
        n = len(text)

        def flush():
            nonlocal buf
            if buf:
                tokens.append(Text("".join(buf), bold=bold))
                buf = []

        while i < n:
            ch = text[i]
            if ch == "{" and text.startswith("{{", i):
                end = _match_braces(text, i)
                if end is None:
                    buf.append(ch)
                    i += 1
                    continue
                flush()
                tokens.extend(self._inline_template(text[i + 2 : end]))
                i = end + 2
            elif ch == "[" and text.startswith("[[", i):
                end = text.find("]]", i + 2)
                if end == -1:
                    buf.append(ch)
                    i += 1
                    continue
                inner = text[i + 2 : end]
                target, _, anchor = inner.partition("|")
                target = target.strip()
                anchor = anchor.strip() if anchor else target
                if target:
                    flush()
                    tokens.append(InternalLink(target=target, anchor=anchor or target))
                i = end + 2
            elif ch == "[" and _URL_SCHEME_RE.match(text, i + 1):
                end = text.find("]", i + 1)
                if end == -1:
                    buf.append(ch)
                    i += 1
                    continue
                inner = text[i + 1 : end]
                url, _, anchor = inner.partition(" ")
                flush()
                tokens.append(ExternalLink(url=url, anchor=anchor.strip() or url))
                i = end + 1
            elif ch == "<" and _REF_SELFCLOSE_RE.match(text, i):
                m = _REF_SELFCLOSE_RE.match(text, i)
                flush()
                tokens.append(Reference(""))
                i = m.end()
            elif ch == "<" and _REF_OPEN_RE.match(text, i):
                m = _REF_OPEN_RE.match(text, i)
                close = text.find("</ref>", m.end())
                if close == -1:
                    buf.append(ch)
                    i += 1
                    continue
                flush()
                tokens.append(Reference(text[m.end() : close].strip()))
                i = close + len("</ref>")
            elif ch == "'":
                run = 1
                while i + run < n and text[i + run] == "'":
                    run += 1
                if run >= 3:
                    flush()
                    bold = not bold
                    if run >= 5:
                        i += 5  # bold + italic markers together
                    else:
                        i += 3
                elif run == 2:
                    flush()  # italic toggles are stripped
                    i += 2
                else:
                    buf.append(ch)
                    i += 1
            else:
                buf.append(ch)
                i += 1
        flush()
        return _merge_text(tokens)

    def _inline_template(self, body: str) -> list:
        """Templates in inline position degrade to their positional-param text."""
        self.warnings.append(
            f"line {self.line_no}: template in inline position reduced to text"
        )
        if self.depth >= MAX_TEMPLATE_DEPTH:
            return [Text(body)]
        tpl = _parse_template_body(body, self.warnings, self.line_no, self.depth + 1)
        parts = []
        for key, value in tpl.params:
            if key.isdigit():
                parts.append(strip_markup(value))
        rendered = " ".join(p for p in parts if p)
        return [Text(rendered)] if rendered else []


def _merge_text(tokens: list) -> list:
    merged: list = []
    for tok in tokens:
        if (
            merged
            and isinstance(tok, Text)
            and isinstance(merged[-1], Text)
            and merged[-1].bold == tok.bold
        ):
            merged[-1] = Text(merged[-1].value + tok.value, bold=tok.bold)
        else:
            merged.append(tok)
    return merged


def _match_braces(text: str, start: int) -> int | None:
    """Index of the '}}' closing the '{{' at start, honoring nesting."""
    depth = 0
    i = start
    n = len(text)
    while i < n - 1:
        if text.startswith("{{", i):
            depth += 1
            i += 2
        elif text.startswith("}}", i):
            depth -= 1
            if depth == 0:
                return i
            i += 2
        else:
            i += 1
    return None


def _split_template_params(body: str) -> list[str]:
    """Split on '|' at top level only (nested {{ }} and [[ ]] protected)."""
    parts = []
    buf: list[str] = []
    brace = 0
    bracket = 0
    i = 0
    n = len(body)
    while i < n:
        if body.startswith("{{", i):
            brace += 1
            buf.append("{{")
            i += 2
        elif body.startswith("}}", i):
            brace -= 1
            buf.append("}}")
            i += 2
        elif body.startswith("[[", i):
            bracket += 1
            buf.append("[[")
            i += 2
        elif body.startswith("]]", i):
            bracket -= 1
            buf.append("]]")
            i += 2
        elif body[i] == "|" and brace == 0 and bracket == 0:
            parts.append("".join(buf))
            buf = []
            i += 1
        else:
            buf.append(body[i])
            i += 1
    parts.append("".join(buf))
    return parts


def _parse_template_body(body: str, warnings: list, line_no: int, depth: int = 0) -> Template:
    parts = _split_template_params(body)
    name = parts[0].strip()
    scanner = _InlineScanner(warnings, line_no, depth)
    params: list = []
    seen: dict[str, int] = {}
    positional = 0
    for raw in parts[1:]:
        key, eq, value = raw.partition("=")
        if eq and key.strip() and "{{" not in key and "[[" not in key:
            k = key.strip()
            v = value
        else:
            positional += 1
            k = str(positional)
            v = raw
        tokens = scanner.scan(v.strip())
        if k in seen:
            warnings.append(f"line {line_no}: duplicate template key {k!r}, last wins")
            params[seen[k]] = (k, tokens)
        else:
            seen[k] = len(params)
            params.append((k, tokens))
    return Template(name=name, params=params)


# ---------------------------------------------------------------------------
# Page-level parser
# ---------------------------------------------------------------------------

_MAX_JOINED_LINES = 50


def _logical_lines(text: str):
    """Join physical lines while a '{{' is left unclosed, so templates may
    span lines. A blank line or a runaway join (unbalanced braces) ends the
    accumulation so broken markup cannot swallow the rest of the page."""
    pending: list[str] = []
    pending_start = 0
    depth = 0
    for idx, line in enumerate(text.split("\n"), start=1):
        if pending and (not line.strip() or len(pending) >= _MAX_JOINED_LINES):
            yield pending_start, "\n".join(pending)
            pending = []
            depth = 0
        if not pending:
            pending_start = idx
        pending.append(line)
        depth += line.count("{{") - line.count("}}")
        if depth <= 0:
            yield pending_start, "\n".join(pending)
            pending = []
            depth = 0
    if pending:
        yield pending_start, "\n".join(pending)


def parse_page(title: str, wikitext: str, language_code: str = "") -> PageTree:
    """Parse wikitext into a PageTree. Total: never raises on any input."""
    tree = PageTree(page_title=title, language_code=language_code)
    source = _COMMENT_RE.sub("", wikitext or "")

    section_stack: list[Section] = []
    list_stack: list[ListItem] = []

    def container() -> list:
        return section_stack[-1].children if section_stack else tree.root

    for line_no, line in _logical_lines(source):
        stripped = line.strip()
        if not stripped:
            list_stack.clear()
            continue

        m = _HEADING_RE.match(stripped)
        if m and "\n" not in stripped:
            level = min(len(m.group(1)), len(m.group(3)))
            if level < 2:
                tree.warnings.append(f"line {line_no}: level-1 heading treated as level 2")
                level = 2
            level = min(level, 6)
            sec = Section(title=m.group(2), level=level)
            while section_stack and section_stack[-1].level >= level:
                section_stack.pop()
            container().append(sec)
            section_stack.append(sec)
            list_stack.clear()
            continue

        m = _LIST_RE.match(stripped)
        if m:
            depth = len(m.group(1))
            while list_stack and list_stack[-1].depth >= depth:
                list_stack.pop()
            if list_stack and depth > list_stack[-1].depth + 1:
                tree.warnings.append(
                    f"line {line_no}: list depth jumps from {list_stack[-1].depth} to {depth}"
                )
                depth = list_stack[-1].depth + 1
            elif not list_stack and depth > 1:
                tree.warnings.append(f"line {line_no}: list starts at depth {depth}")
                depth = 1
            scanner = _InlineScanner(tree.warnings, line_no)
            item = ListItem(depth=depth, inline=scanner.scan(m.group(2)))
            if list_stack:
                list_stack[-1].children.append(item)
            else:
                container().append(item)
            list_stack.append(item)
            continue

        if stripped.startswith("{{") and _match_braces(stripped, 0) == len(stripped) - 2:
            tpl = _parse_template_body(stripped[2:-2], tree.warnings, line_no)
            if tpl.name:
                container().append(tpl)
                list_stack.clear()
                continue

        scanner = _InlineScanner(tree.warnings, line_no)
        tokens = scanner.scan(stripped)
        if tokens:
            container().append(TextBlock(inline=tokens))
        list_stack.clear()

    return tree


# ---------------------------------------------------------------------------
# Accessors
# ---------------------------------------------------------------------------

def strip_markup(inlines: list) -> str:
    """Render inline tokens as plain text: links become anchors, refs drop,
    whitespace collapses to single spaces."""
    parts = []
    for tok in inlines:
        if isinstance(tok, Text):
            parts.append(tok.value)
        elif isinstance(tok, (InternalLink, ExternalLink)):
            parts.append(tok.anchor)
        elif isinstance(tok, Reference):
            pass
        else:
            raise TypeError(f"not an inline token: {tok!r}")
    return re.sub(r"\s+", " ", "".join(parts)).strip()


def template_value(template: Template, keys: list[str]) -> str | None:
    """Stripped value of the first key present, searched in priority order."""
    lookup = {k: v for k, v in template.params}
    for key in keys:
        if key in lookup:
            return strip_markup(lookup[key])
    return None


def iter_nodes(nodes: list):
    """Depth-first traversal over every node in the tree."""
    stack = list(reversed(nodes))
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (Section, ListItem)):
            stack.extend(reversed(node.children))


def source_text_fragments(tree: PageTree):
    """Every data-bearing string in the tree, in document order.

    Supports the reconstruction check: concatenating these fragments yields the
    non-markup characters of the source. Links contribute the target plus the
    anchor only when it differs; positional template keys are synthetic and
    excluded.
    """

    def from_inline(tokens: list):
        for tok in tokens:
            if isinstance(tok, Text):
                yield tok.value
            elif isinstance(tok, InternalLink):
                yield tok.target
                if tok.anchor != tok.target:
                    yield tok.anchor
            elif isinstance(tok, ExternalLink):
                yield tok.url
                if tok.anchor != tok.url:
                    yield tok.anchor
            elif isinstance(tok, Reference):
                yield tok.content

    for node in iter_nodes(tree.root):
        if isinstance(node, Section):
            yield node.title
        elif isinstance(node, (ListItem, TextBlock)):
            yield from from_inline(node.inline)
        elif isinstance(node, Template):
            yield node.name
            for key, value in node.params:
                if not key.isdigit():
                    yield key
                yield from from_inline(value)


# ---------------------------------------------------------------------------
# JSON round-trip for intermediates and snapshots
# ---------------------------------------------------------------------------

def node_to_dict(node) -> dict:
    if isinstance(node, Text):
        return {"kind": "text", "value": node.value, "bold": node.bold}
    if isinstance(node, InternalLink):
        return {"kind": "ilink", "target": node.target, "anchor": node.anchor}
    if isinstance(node, ExternalLink):
        return {"kind": "elink", "url": node.url, "anchor": node.anchor}
    if isinstance(node, Reference):
        return {"kind": "ref", "content": node.content}
    if isinstance(node, Section):
        return {
            "kind": "section",
            "title": node.title,
            "level": node.level,
            "children": [node_to_dict(c) for c in node.children],
        }
    if isinstance(node, ListItem):
        return {
            "kind": "item",
            "depth": node.depth,
            "inline": [node_to_dict(t) for t in node.inline],
            "children": [node_to_dict(c) for c in node.children],
        }
    if isinstance(node, Template):
        return {
            "kind": "template",
            "name": node.name,
            "params": [[k, [node_to_dict(t) for t in v]] for k, v in node.params],
        }
    if isinstance(node, TextBlock):
        return {"kind": "block", "inline": [node_to_dict(t) for t in node.inline]}
    raise TypeError(f"not a tree node: {node!r}")


def node_from_dict(data: dict):
    kind = data["kind"]
    if kind == "text":
        return Text(data["value"], bold=data.get("bold", False))
    if kind == "ilink":
        return InternalLink(data["target"], data["anchor"])
    if kind == "elink":
        return ExternalLink(data["url"], data["anchor"])
    if kind == "ref":
        return Reference(data["content"])
    if kind == "section":
        return Section(
            data["title"], data["level"], [node_from_dict(c) for c in data["children"]]
        )
    if kind == "item":
        return ListItem(
            data["depth"],
            [node_from_dict(t) for t in data["inline"]],
            [node_from_dict(c) for c in data["children"]],
        )
    if kind == "template":
        return Template(
            data["name"], [(k, [node_from_dict(t) for t in v]) for k, v in data["params"]]
        )
    if kind == "block":
        return TextBlock([node_from_dict(t) for t in data["inline"]])
    raise ValueError(f"unknown node kind {kind!r}")
